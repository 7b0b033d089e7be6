//! The brick `u_{q,m,ρ}(x) = ρ²/(ρ² + (x₁ − ρq)² + (m x₂)²)`, its polar
//! composite `v = u∘σ` with `σ(r, θ) = (r cos θ, r sin θ)`, and sweeps of the
//! a priori derivative bounds.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_rational, pow_rational, Jet2, JetScalar, MultiIndex};
use crate::report::{BoundReport, BoundSample};
use crate::sampling;

/// Bound constant used by default for the polar brick estimate.
pub const DEFAULT_POLAR_CONSTANT: f64 = 32_768.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrickParams {
    pub q: f64,
    pub m: f64,
    pub rho: f64,
}

impl BrickParams {
    pub fn new(q: f64, m: f64, rho: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::domain(format!("brick needs q >= 1, got {q}")));
        }
        if !(m >= 1.0 && m.is_finite()) {
            return Err(Error::domain(format!("brick needs m >= 1, got {m}")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!("brick needs 0 < rho < 1, got {rho}")));
        }
        Ok(BrickParams { q, m, rho })
    }

    /// `p = (ρq, 0)`.
    pub fn center(&self) -> [f64; 2] {
        [self.rho * self.q, 0.0]
    }
}

pub fn brick_eval(p: &BrickParams, x: [f64; 2]) -> f64 {
    let d1 = x[0] - p.rho * p.q;
    let d2 = p.m * x[1];
    let r2 = p.rho * p.rho;
    r2 / (r2 + d1 * d1 + d2 * d2)
}

pub fn polar_brick_eval(p: &BrickParams, r: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    brick_eval(p, [r * c, r * s])
}

/// The brick applied to arbitrary jets `x₁, x₂` (same base and degree).
pub fn brick_of_jets<S: JetScalar>(p: &BrickParams, x1: &Jet2<S>, x2: &Jet2<S>) -> Result<Jet2<S>> {
    let rho = S::from_f64(p.rho);
    let rho2 = rho.clone() * rho.clone();
    let d1 = x1.add_scalar(&-(rho * S::from_f64(p.q)));
    let d2 = x2.scale(&S::from_f64(p.m));
    let denom = (&(&d1 * &d1) + &(&d2 * &d2)).add_scalar(&rho2);
    Ok(denom.recip()?.scale(&rho2))
}

/// Jet of `u_{q,m,ρ}` at `x`.
pub fn brick_jet<S: JetScalar>(p: &BrickParams, x: [S; 2], degree: usize) -> Result<Jet2<S>> {
    let (x1, x2) = Jet2::coordinates(x, degree);
    brick_of_jets(p, &x1, &x2)
}

/// Polar coordinate jets `(r cos θ, r sin θ)` in the variables `(r, θ)`.
///
/// Exact scalars require `θ = 0`.
pub fn polar_coordinates<S: JetScalar>(r: S, theta: S, degree: usize) -> Result<(Jet2<S>, Jet2<S>)> {
    let (rj, tj) = Jet2::coordinates([r, theta], degree);
    let (s, c) = tj.sin_cos()?;
    Ok((&rj * &c, &rj * &s))
}

/// Jet of `v_{q,m,ρ}(r, θ)` in `(r, θ)`.
pub fn polar_brick_jet<S: JetScalar>(p: &BrickParams, r: S, theta: S, degree: usize) -> Result<Jet2<S>> {
    let (x1, x2) = polar_coordinates(r, theta, degree)?;
    brick_of_jets(p, &x1, &x2)
}

/// Jet of `1/(c + x₁² + x₂²)` at `x`.
pub fn inverse_quadratic_jet<S: JetScalar>(c: S, x: [S; 2], degree: usize) -> Result<Jet2<S>> {
    let (x1, x2) = Jet2::coordinates(x, degree);
    (&(&x1 * &x1) + &(&x2 * &x2)).add_scalar(&c).recip()
}

pub(crate) fn multiindices(dmax: usize) -> impl Iterator<Item = MultiIndex> {
    (0..=dmax).flat_map(|t| (0..=t).map(move |j| (t - j, j)))
}

/// Exact test of `|coef|·s^{1+|α|/2} ≤ K` via `coef²·s^{2+|α|} ≤ K²`.
pub(crate) fn exact_scaled_le(coef: &BigRational, s: &BigRational, order: usize, k: &BigRational) -> bool {
    coef * coef * pow_rational(s, order + 2) <= k * k
}

pub(crate) fn sample(
    point: [f64; 2],
    params: Vec<f64>,
    alpha: MultiIndex,
    lhs_log: f64,
    rhs_log: f64,
    pass: bool,
) -> BoundSample {
    BoundSample {
        point,
        params,
        alpha,
        lhs_log,
        rhs_log,
        margin_log: rhs_log - lhs_log,
        pass,
    }
}

pub(crate) fn eight_pow(n: usize) -> BigRational {
    BigRational::from_integer(num_bigint::BigInt::from(8).pow(n as u32))
}

/// Checks `|∂^α f(x)/α!| ≤ 8·8^{|α|}/(c + |x|²)^{1+|α|/2}` for `f = 1/(c + x₁² + x₂²)`
/// and `|α| ≤ dmax`, exactly. Returns the per-α outcomes and the smallest `B`
/// with `|∂^α f(x)/α!| ≤ 8·B^{|α|}/(c+|x|²)^{1+|α|/2}` at this point.
pub fn cauchy_bound_point(
    c: &BigRational,
    x: &[BigRational; 2],
    dmax: usize,
) -> Result<(Vec<BoundSample>, f64)> {
    if !c.is_positive() {
        return Err(Error::domain("cauchy bound needs c > 0"));
    }
    let jet = inverse_quadratic_jet(c.clone(), x.clone(), dmax)?;
    let s = c + &x[0] * &x[0] + &x[1] * &x[1];
    let ln_s = ln_rational(&s);
    let point = [x[0].to_f64(), x[1].to_f64()];
    let mut out = Vec::new();
    let mut best_b: f64 = 0.0;
    for alpha in multiindices(dmax) {
        let order = alpha.0 + alpha.1;
        let coef = jet.coeff(alpha.0, alpha.1);
        let k = eight_pow(order + 1);
        let pass = exact_scaled_le(&coef, &s, order, &k);
        let lhs_log = ln_rational(&coef);
        let rhs_log = (order + 1) as f64 * 8f64.ln() - (1.0 + order as f64 / 2.0) * ln_s;
        if order >= 1 && !coef.is_zero() {
            let scaled = lhs_log + (1.0 + order as f64 / 2.0) * ln_s - 8f64.ln();
            best_b = best_b.max((scaled / order as f64).exp());
        }
        out.push(sample(point, vec![c.to_f64()], alpha, lhs_log, rhs_log, pass));
    }
    Ok((out, best_b))
}

/// Exact sweep of the Cauchy-type bound over `count` random rational `(c, x)`.
pub fn cauchy_sweep(seed: u64, count: usize, dmax: usize) -> Result<BoundReport> {
    let mut g = sampling::rng(seed);
    let inputs: Vec<(BigRational, [BigRational; 2])> = (0..count)
        .map(|_| {
            let mut c = sampling::rational_in(&mut g, 0, 4, 16);
            if c.is_zero() {
                c = BigRational::new(1.into(), 16.into());
            }
            let x = [
                sampling::rational_in(&mut g, -3, 3, 16),
                sampling::rational_in(&mut g, -3, 3, 16),
            ];
            (c, x)
        })
        .collect();
    let parts: Vec<(Vec<BoundSample>, f64)> = inputs
        .par_iter()
        .map(|(c, x)| cauchy_bound_point(c, x, dmax))
        .collect::<Result<_>>()?;
    let mut report = BoundReport::new("cauchy", true, dmax);
    report.seed = Some(seed);
    report.constant = Some(8.0);
    for (samples, b) in parts {
        report.push_point(samples);
        report.observe_constant(b);
    }
    Ok(report)
}

/// Checks `|∂^α u/α!| ≤ ρ² m^{α₂} 8^{|α|+1} (u/ρ²)^{1+|α|/2}` exactly at a rational point.
pub fn brick_remark_point(p: &BrickParams, x: &[BigRational; 2], dmax: usize) -> Result<Vec<BoundSample>> {
    let jet = brick_jet(p, x.clone(), dmax)?;
    let rho = BigRational::from_float(p.rho).expect("finite");
    let m = BigRational::from_float(p.m).expect("finite");
    let q = BigRational::from_float(p.q).expect("finite");
    let d1 = &x[0] - &rho * &q;
    let d2 = &m * &x[1];
    // u/ρ² = 1/s
    let s = &rho * &rho + &d1 * &d1 + &d2 * &d2;
    let ln_s = ln_rational(&s);
    let point = [x[0].to_f64(), x[1].to_f64()];
    let mut out = Vec::new();
    for alpha in multiindices(dmax) {
        let order = alpha.0 + alpha.1;
        let coef = jet.coeff(alpha.0, alpha.1);
        let k = &rho * &rho * pow_rational(&m, alpha.1) * eight_pow(order + 1);
        let pass = exact_scaled_le(&coef, &s, order, &k);
        let rhs_log = ln_rational(&k) - (1.0 + order as f64 / 2.0) * ln_s;
        out.push(sample(point, vec![p.q, p.m, p.rho], alpha, ln_rational(&coef), rhs_log, pass));
    }
    Ok(out)
}

/// Outcomes of `|∂^α v/α!| ≤ m^{|α|}(1+qρ)^{α₂} C^{|α|+1}` at one polar point, and
/// the smallest `C` that would fit there.
pub fn polar_brick_point(p: &BrickParams, r: f64, theta: f64, dmax: usize, c: f64) -> Result<(Vec<BoundSample>, f64)> {
    let jet = polar_brick_jet(p, r, theta, dmax)?;
    let (ln_m, ln_q, ln_c) = (p.m.ln(), (1.0 + p.q * p.rho).ln(), c.ln());
    let mut out = Vec::new();
    let mut best_c: f64 = 0.0;
    for alpha in multiindices(dmax) {
        let order = alpha.0 + alpha.1;
        let lhs_log = jet.coeff(alpha.0, alpha.1).abs().ln();
        let shape = order as f64 * ln_m + alpha.1 as f64 * ln_q;
        let rhs_log = shape + (order + 1) as f64 * ln_c;
        if lhs_log.is_finite() {
            best_c = best_c.max(((lhs_log - shape) / (order + 1) as f64).exp());
        }
        out.push(sample([r, theta], vec![p.q, p.m, p.rho], alpha, lhs_log, rhs_log, lhs_log <= rhs_log));
    }
    Ok((out, best_c))
}

/// Random brick parameters for sweeps: `q, m ∈ [1, 4]`, `ρ ∈ [1/16, 15/16]`.
pub fn sample_params(g: &mut rand_chacha::ChaCha8Rng) -> BrickParams {
    use rand::Rng;
    BrickParams {
        q: g.random_range(1.0..=4.0),
        m: g.random_range(1.0..=4.0),
        rho: g.random_range(1.0 / 16.0..=15.0 / 16.0),
    }
}

/// Float sweep of the polar brick bound. `params = None` draws fresh brick
/// parameters per sample.
pub fn polar_brick_sweep(
    params: Option<BrickParams>,
    seed: u64,
    count: usize,
    dmax: usize,
    c: f64,
) -> Result<BoundReport> {
    let points = sampling::polar_points(seed, count);
    let mut g = sampling::rng(seed.wrapping_add(1));
    let inputs: Vec<(BrickParams, [f64; 2])> = points
        .into_iter()
        .map(|pt| (params.unwrap_or_else(|| sample_params(&mut g)), pt))
        .collect();
    let parts: Vec<(Vec<BoundSample>, f64)> = inputs
        .par_iter()
        .map(|(p, [r, t])| polar_brick_point(p, *r, *t, dmax, c))
        .collect::<Result<_>>()?;
    let mut report = BoundReport::new("polar-brick", false, dmax);
    report.seed = Some(seed);
    report.constant = Some(c);
    for (samples, b) in parts {
        report.push_point(samples);
        report.observe_constant(b);
    }
    Ok(report)
}

/// Exact sweep of the brick remark bound at random rational points near the center.
pub fn brick_remark_sweep(p: &BrickParams, seed: u64, count: usize, dmax: usize) -> Result<BoundReport> {
    let mut g = sampling::rng(seed);
    let xs: Vec<[BigRational; 2]> = (0..count)
        .map(|_| [sampling::rational_in(&mut g, -2, 4, 16), sampling::rational_in(&mut g, -2, 2, 16)])
        .collect();
    let parts: Vec<Vec<BoundSample>> = xs
        .par_iter()
        .map(|x| brick_remark_point(p, x, dmax))
        .collect::<Result<_>>()?;
    let mut report = BoundReport::merge("brick", true, dmax, parts);
    report.seed = Some(seed);
    Ok(report)
}

/// Brick value is `1` exactly at the center: used as a sanity anchor by callers.
pub fn center_value_is_one(p: &BrickParams) -> bool {
    let c = p.center();
    let jet = brick_jet(p, [BigRational::from_float(c[0]).expect("finite"), BigRational::zero()], 0);
    matches!(jet, Ok(j) if j.value().is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_difference_check, DEFAULT_STEP};
    use num_bigint::BigInt;
    use rand::Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn p231() -> BrickParams {
        BrickParams::new(2.0, 3.0, 0.5).unwrap()
    }

    #[test]
    fn eval_examples() {
        let p = BrickParams::new(2.0, 1.0, 0.5).unwrap();
        assert_eq!(brick_eval(&p, p.center()), 1.0);
        assert!((brick_eval(&p, [0.0, 0.0]) - 0.2).abs() < 1e-15);
        assert!(center_value_is_one(&p231()));
        assert!(BrickParams::new(0.5, 1.0, 0.5).is_err());
        assert!(BrickParams::new(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn decreases_along_rays() {
        let p = p231();
        let c = p.center();
        for k in 0..16 {
            let a = k as f64 * std::f64::consts::PI / 8.0;
            let vals: Vec<f64> = (0..40)
                .map(|i| {
                    let t = i as f64 * 0.05;
                    brick_eval(&p, [c[0] + t * a.cos(), c[1] + t * a.sin()])
                })
                .collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
            assert!(vals.iter().all(|&v| v > 0.0 && v <= 1.0));
        }
    }

    #[test]
    fn center_jet_examples() {
        let p = p231();
        let jet = brick_jet(&p, [q(1, 1), q(0, 1)], 4).unwrap();
        // −2m²/ρ² = −2·9·4
        assert_eq!(jet.derivative((0, 2)).unwrap(), q(-72, 1));
        assert_eq!(jet.derivative((0, 1)).unwrap(), q(0, 1));
        assert_eq!(jet.value(), &q(1, 1));
        let fd = finite_difference_check(|a, b| brick_eval(&p, [a, b]), p.center(), (0, 2), DEFAULT_STEP);
        assert!((fd + 72.0).abs() <= 1e-6 * 72.0, "{fd}");
    }

    #[test]
    fn jets_match_finite_differences() {
        let mut g = sampling::rng(11);
        for _ in 0..20 {
            let p = sample_params(&mut g);
            let x = [g.random_range(-0.5..2.0), g.random_range(-1.0..1.0)];
            let jet = brick_jet(&p, x, 4).unwrap();
            // difference in the bump's natural units (ρ along x₁, ρ/m along x₂)
            let (s1, s2) = (p.rho, p.rho / p.m);
            let scaled = |a: f64, b: f64| brick_eval(&p, [x[0] + s1 * a, x[1] + s2 * b]);
            for order in 1..=4 {
                for (alpha, d) in jet.derivatives_of_order(order).unwrap() {
                    let exact = d * s1.powi(alpha.0 as i32) * s2.powi(alpha.1 as i32);
                    let fd = finite_difference_check(scaled, [0.0, 0.0], alpha, DEFAULT_STEP);
                    assert!(
                        (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                        "{p:?} {x:?} {alpha:?}: {exact} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn axis_symmetry_exact() {
        let p = p231();
        for x1 in [q(-1, 2), q(1, 1), q(7, 3)] {
            let jet = brick_jet(&p, [x1.clone(), q(0, 1)], 7).unwrap();
            for t in 0..=7 {
                for j in (1..=t).step_by(2) {
                    assert!(jet.coeff(t - j, j).is_zero());
                }
            }
            let pj = polar_brick_jet(&p, x1.abs(), q(0, 1), 7).unwrap();
            for t in 0..=7 {
                for j in (1..=t).step_by(2) {
                    assert!(pj.coeff(t - j, j).is_zero());
                }
            }
        }
    }

    #[test]
    fn cauchy_examples() {
        let (s, _) = cauchy_bound_point(&q(1, 1), &[q(0, 1), q(0, 1)], 2).unwrap();
        let at = |a: MultiIndex| s.iter().find(|x| x.alpha == a).unwrap().clone();
        assert_eq!(at((0, 0)).lhs_log, 0.0);
        assert!((at((0, 0)).rhs_log - 8f64.ln()).abs() < 1e-15);
        assert_eq!(at((0, 2)).lhs_log, 0.0);
        assert!((at((0, 2)).rhs_log - 512f64.ln()).abs() < 1e-12);
        assert!(s.iter().all(|x| x.pass));
    }

    #[test]
    fn cauchy_sweep_small() {
        let r = cauchy_sweep(3, 10, 6).unwrap();
        assert!(r.passed());
        assert_eq!(r.points, 10);
        assert_eq!(r.checks, 10 * 28);
    }

    #[test]
    fn remark_bound_exact() {
        let r = brick_remark_sweep(&p231(), 5, 10, 8).unwrap();
        assert!(r.passed(), "{:?}", r.worst);
        let r2 = brick_remark_sweep(&BrickParams::new(1.0, 1.0, 0.25).unwrap(), 6, 10, 8).unwrap();
        assert!(r2.passed());
    }

    #[test]
    fn polar_consistency() {
        let mut g = sampling::rng(9);
        for _ in 0..50 {
            let p = sample_params(&mut g);
            let r = g.random_range(0.0..5.0);
            let t = g.random_range(-3.0..3.0);
            let jet = polar_brick_jet(&p, r, t, 3).unwrap();
            let direct = brick_eval(&p, [r * t.cos(), r * t.sin()]);
            assert!((jet.value() - direct).abs() <= 1e-14);
            assert!((polar_brick_eval(&p, r, t) - direct).abs() <= 1e-15);
        }
        let p = p231();
        let v = polar_brick_jet(&p, 1.0, 0.0, 2).unwrap();
        assert!((v.value() - 1.0).abs() < 1e-15);
        assert!(v.derivative((0, 1)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn polar_sweep_default_constant() {
        let r = polar_brick_sweep(None, 4, 40, 6, DEFAULT_POLAR_CONSTANT).unwrap();
        assert!(r.passed());
        assert!(r.empirical_constant.unwrap() < DEFAULT_POLAR_CONSTANT);
    }

    /// At the center preimage `v(r, 0) = 1/(1 + ((r − ρq)/ρ)²)`, so
    /// `|∂_r^n v/n!| = ρ^{-n}` for even `n`: no constant independent of ρ can
    /// bound every order.
    #[test]
    fn polar_constant_grows_as_rho_shrinks() {
        let mut prev = 0.0;
        for j in [2, 6, 10, 14, 20] {
            let rho = 2f64.powi(-j);
            let p = BrickParams::new(1.0, 1.0, rho).unwrap();
            let (samples, c) = polar_brick_point(&p, rho, 0.0, 6, DEFAULT_POLAR_CONSTANT).unwrap();
            let c6 = samples.iter().find(|s| s.alpha == (6, 0)).unwrap();
            assert!((c6.lhs_log - 6.0 * (1.0 / rho).ln()).abs() < 1e-9);
            assert!(c > prev);
            prev = c;
            if j == 20 {
                assert!(samples.iter().any(|s| !s.pass));
            }
        }
    }
}
