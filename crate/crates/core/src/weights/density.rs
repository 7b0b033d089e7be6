use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::WeightSequence;
use crate::error::{Error, Result};

/// `Λ_ε = {1 ≤ k ≤ K : (M_k²/M_{2k})^{1/2k} < 1 − ε}`.
pub fn lambda_eps(m: &WeightSequence, eps: f64, horizon: u64) -> Result<Vec<u64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::usage(format!("eps must lie in (0, 1), got {eps}")));
    }
    let cut = (1.0 - eps).ln();
    let mut out = Vec::new();
    for k in 1..=horizon {
        let v = (2.0 * m.log_m(k)? - m.log_m(2 * k)?) / (2 * k) as f64;
        if v < cut {
            out.push(k);
        }
    }
    Ok(out)
}

/// Exact check of `Σ_{k∈Λ, k≤n} 1/k = ∫₁ⁿ A_Λ(x)/x² dx + A_Λ(n)/n`.
#[derive(Debug, Clone, Serialize)]
pub struct AbelCheck {
    pub n: u64,
    /// Left side as a reduced fraction.
    pub harmonic: String,
    /// Right side as a reduced fraction.
    pub integral_plus_boundary: String,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    /// `(n, A_Λ(n))`.
    pub counting: Vec<(u64, u64)>,
    /// `(n, A_Λ(n)/n)`.
    pub density_estimates: Vec<(u64, f64)>,
    /// `(n, Σ_{k∈Λ, k≤n} 1/k)`.
    pub harmonic_partial_sums: Vec<(u64, f64)>,
    pub abel: Vec<AbelCheck>,
}

fn frac(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Counting function, density ratios, harmonic sums and the exact Abel
/// summation identity of an index set at the sample points `ns`.
///
/// Only positive members of `Λ` are counted (`1/k` is undefined at `0`).
/// The integral is evaluated exactly as a step-function integral.
pub fn density_estimate(lambda: &[u64], ns: &[u64]) -> Result<DensityReport> {
    let mut members: Vec<u64> = lambda.iter().copied().filter(|&k| k > 0).collect();
    members.sort_unstable();
    members.dedup();
    let count = |n: u64| members.partition_point(|&k| k <= n) as u64;

    let mut report = DensityReport {
        counting: Vec::new(),
        density_estimates: Vec::new(),
        harmonic_partial_sums: Vec::new(),
        abel: Vec::new(),
    };
    for &n in ns {
        if n == 0 {
            return Err(Error::usage("density sample points must be >= 1"));
        }
        let a = count(n);
        report.counting.push((n, a));
        report.density_estimates.push((n, a as f64 / n as f64));

        let mut harmonic = BigRational::zero();
        for &k in members.iter().take_while(|&&k| k <= n) {
            harmonic += frac(1, k);
        }
        // A_Λ steps up by one at each member; between consecutive members the
        // integrand is constant, so each run contributes A·(1/start − 1/end).
        let inside = &members[..a as usize];
        let mut integral = BigRational::zero();
        for (i, &start) in inside.iter().enumerate() {
            let end = inside.get(i + 1).copied().unwrap_or(n);
            if end > start {
                integral += frac(i as u64 + 1, 1) * (frac(1, start) - frac(1, end));
            }
        }
        let rhs = integral + frac(a, n);
        report
            .harmonic_partial_sums
            .push((n, num_traits::ToPrimitive::to_f64(&harmonic).unwrap_or(f64::NAN)));
        report.abel.push(AbelCheck {
            n,
            equal: harmonic == rhs,
            harmonic: harmonic.to_string(),
            integral_plus_boundary: rhs.to_string(),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evens_have_density_half() {
        let evens: Vec<u64> = (1..=10_000).map(|k| 2 * k).collect();
        let r = density_estimate(&evens, &[10, 100, 1000, 10_000]).unwrap();
        for &(n, d) in &r.density_estimates {
            assert!((d - 0.5).abs() <= 0.5 / n as f64 + 1e-15);
        }
        assert!(r.counting.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(r.counting.iter().all(|&(n, a)| a <= n));
    }

    #[test]
    fn squares_have_density_zero() {
        let squares: Vec<u64> = (1..=1000).map(|k| k * k).collect();
        let r = density_estimate(&squares, &[100, 10_000, 1_000_000]).unwrap();
        let d: Vec<f64> = r.density_estimates.iter().map(|p| p.1).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert!(d[2] <= 1e-3);
    }

    #[test]
    fn abel_identity_is_exact_for_evens() {
        let evens: Vec<u64> = (0..=60).map(|k| 2 * k).collect();
        let r = density_estimate(&evens, &[100]).unwrap();
        assert!(r.abel[0].equal, "{:?}", r.abel[0]);
        // Σ_{k≤50} 1/(2k) = H_50/2
        let h50: f64 = (1..=50).map(|k| 1.0 / k as f64).sum();
        assert!((r.harmonic_partial_sums[0].1 - h50 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn lambda_eps_examples() {
        let g = WeightSequence::gevrey(1.0).unwrap();
        // (k!²/(2k)!)^{1/2k} → 1/2, so every k lands in Λ_ε for ε < 1/2 eventually
        let l = lambda_eps(&g, 0.25, 200).unwrap();
        assert!(l.contains(&200));
        assert!(lambda_eps(&WeightSequence::analytic(), 0.1, 100).unwrap().is_empty());
        assert!(lambda_eps(&g, 1.5, 10).is_err());
        assert!(lambda_eps(&g, 0.0, 10).is_err());
    }
}
