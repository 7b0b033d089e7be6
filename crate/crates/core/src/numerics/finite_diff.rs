use super::MultiIndex;

/// Default base step for [`finite_difference_check`].
pub const DEFAULT_STEP: f64 = 1e-3;

/// Smallest step used per derivative order (index = order).
///
/// The `h^{-|α|}` roundoff amplification dominates below these in double
/// precision; the values were picked by scanning steps against exact jets.
const STEP_FLOOR: [f64; 5] = [0.0, 1e-3, 1e-2, 2e-2, 3e-2];

/// Fourth-order accurate central stencil for a pure `n`-th derivative: integer
/// weights with offsets in units of `h`, and the common denominator.
fn stencil(n: usize) -> (Vec<(f64, f64)>, f64) {
    let (w, d): (&[f64], f64) = match n {
        0 => (&[1.0], 1.0),
        1 => (&[1.0, -8.0, 0.0, 8.0, -1.0], 12.0),
        2 => (&[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0),
        3 => (&[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0),
        4 => (&[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0], 6.0),
        _ => panic!("finite differences only up to order 4 per variable"),
    };
    let half = (w.len() / 2) as f64;
    let taps = w
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i as f64 - half))
        .collect();
    (taps, d)
}

fn central<F: Fn(f64, f64) -> f64>(f: &F, x: [f64; 2], alpha: MultiIndex, h: f64) -> f64 {
    let (s1, d1) = stencil(alpha.0);
    let (s2, d2) = stencil(alpha.1);
    let mut acc = 0.0;
    for &(w1, o1) in &s1 {
        for &(w2, o2) in &s2 {
            acc += w1 * w2 * f(x[0] + o1 * h, x[1] + o2 * h);
        }
    }
    acc / (d1 * d2 * h.powi((alpha.0 + alpha.1) as i32))
}

/// Central finite-difference estimate of `∂^α f(x)` for `|α| ≤ 4`,
/// Richardson-extrapolated from steps `h` and `h/2`.
///
/// The base stencils are fourth-order accurate, so the extrapolation removes
/// the `h^4` term. `h` is raised to a per-order floor (`1e-3`, `1e-2`, `2e-2`,
/// `3e-2` for orders 1..4) when smaller.
///
/// # Panics
/// Panics when `|α| > 4`.
pub fn finite_difference_check<F: Fn(f64, f64) -> f64>(
    f: F,
    x: [f64; 2],
    alpha: MultiIndex,
    h: f64,
) -> f64 {
    let order = alpha.0 + alpha.1;
    assert!(order <= 4, "finite differences only up to order 4");
    if order == 0 {
        return f(x[0], x[1]);
    }
    let h = h.max(STEP_FLOOR[order]);
    let coarse = central(&f, x, alpha, h);
    let fine = central(&f, x, alpha, h / 2.0);
    fine + (fine - coarse) / 15.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Jet2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_second_derivative() {
        for &h in &[1e-2, 1e-3, 1e-4] {
            let d = finite_difference_check(|x, _| x * x, [0.7, -0.2], (2, 0), h);
            assert!((d - 2.0).abs() < 1e-8, "h={h} d={d}");
        }
    }

    #[test]
    fn constant_has_no_derivatives() {
        for alpha in [(1, 0), (0, 1), (1, 1), (2, 2), (0, 4), (3, 1)] {
            let d = finite_difference_check(|_, _| 3.5, [1.0, 2.0], alpha, DEFAULT_STEP);
            assert!(d.abs() < 1e-10, "{alpha:?}: {d}");
        }
    }

    type JetFn = fn(&Jet2<f64>, &Jet2<f64>) -> Jet2<f64>;
    type PointFn = fn(f64, f64) -> f64;

    fn poly(x: &Jet2<f64>, y: &Jet2<f64>) -> Jet2<f64> {
        let x2 = x * x;
        &(&(&x2 * y) + &y.powi(3)).scale(&0.5) + &x.scale(&-2.0)
    }

    fn lorentz(x: &Jet2<f64>, y: &Jet2<f64>) -> Jet2<f64> {
        (&(x * x) + &(y * y)).add_scalar(&1.0).recip().unwrap()
    }

    fn sine(x: &Jet2<f64>, y: &Jet2<f64>) -> Jet2<f64> {
        (&(x * y) + x).sin_cos().unwrap().0
    }

    fn cosine(x: &Jet2<f64>, y: &Jet2<f64>) -> Jet2<f64> {
        (&x.scale(&2.0) - y).sin_cos().unwrap().1
    }

    #[test]
    fn jets_agree_with_differences_on_closed_forms() {
        let cases: [(JetFn, PointFn); 4] = [
            (poly, |x, y| 0.5 * (x * x * y + y * y * y) - 2.0 * x),
            (lorentz, |x, y| 1.0 / (1.0 + x * x + y * y)),
            (sine, |x, y| (x * y + x).sin()),
            (cosine, |x, y| (2.0 * x - y).cos()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (jf, pf) in cases {
            for _ in 0..20 {
                let p = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
                let (x, y) = Jet2::coordinates(p, 4);
                let jet = jf(&x, &y);
                for order in 1..=4 {
                    for (alpha, exact) in jet.derivatives_of_order(order).unwrap() {
                        let fd = finite_difference_check(pf, p, alpha, DEFAULT_STEP);
                        let scale = exact.abs().max(1.0);
                        assert!(
                            (fd - exact).abs() <= 1e-6 * scale,
                            "at {p:?} alpha {alpha:?}: jet {exact} fd {fd}"
                        );
                    }
                }
            }
        }
    }
}
