use serde::Serialize;

use super::WeightSequence;
use crate::error::{Error, Result};
use crate::numerics::LogMagnitude;

/// Default increment `S_{2n} − S_n` separating diverging-like from converging-like partial sums.
pub const DEFAULT_TREND_THRESHOLD: f64 = 0.05;

/// Slack for comparing log-domain quantities that are equal in exact arithmetic.
const LOG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    DivergingLike,
    ConvergingLike,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Contained,
    StrictlyContainedDiagnostic,
    NotContainedDiagnostic,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub horizon: u64,
    /// `sup_{1≤k≤K} m_k^{1/k}`.
    pub sup: LogMagnitude,
    pub argsup: u64,
    /// `m_K^{1/K}`, the last scanned value.
    pub last: LogMagnitude,
}

/// `sup_{1≤k≤K} (M_{k+1}/M_k)^{1/k}`: finite iff the class is closed under
/// differentiation at this horizon.
pub fn closure_diagnostic(m: &WeightSequence, horizon: u64) -> Result<ClosureReport> {
    if horizon < 1 {
        return Err(Error::usage("closure diagnostic needs K >= 1"));
    }
    let mut best = (f64::NEG_INFINITY, 1);
    let mut last = 0.0;
    for k in 1..=horizon {
        let v = m.log_ratio(k)? / k as f64;
        if v > best.0 {
            best = (v, k);
        }
        last = v;
    }
    Ok(ClosureReport {
        horizon,
        sup: LogMagnitude::from_log(best.0),
        argsup: best.1,
        last: LogMagnitude::from_log(last),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiReport {
    pub horizon: u64,
    pub threshold: f64,
    /// `(n, S_n)` at `n = 1, 2, 4, …` and at `n = K`.
    pub partial_sums: Vec<(u64, f64)>,
    /// `(n, S_{2n} − S_n)` for the doublings inside the horizon.
    pub doubling_increments: Vec<(u64, f64)>,
    pub trend: Trend,
}

/// Partial sums `S_n = Σ_{k≤n} M_k/((k+1) M_{k+1})` and a trend label.
///
/// Diverging-like when the last three doubling increments are all at least
/// `threshold`, converging-like when all three are below it.
pub fn quasianalyticity_diagnostic(
    m: &WeightSequence,
    horizon: u64,
    threshold: f64,
) -> Result<QuasiReport> {
    if horizon < 1 {
        return Err(Error::usage("quasianalyticity diagnostic needs K >= 1"));
    }
    let mut sums = Vec::with_capacity(horizon as usize + 1);
    let mut acc = 0.0;
    for k in 0..=horizon {
        acc += (-m.log_ratio(k)?).exp() / (k + 1) as f64;
        sums.push(acc);
    }
    let mut partial_sums = Vec::new();
    let mut n = 1;
    while n <= horizon {
        partial_sums.push((n, sums[n as usize]));
        n *= 2;
    }
    if partial_sums.last().map(|p| p.0) != Some(horizon) {
        partial_sums.push((horizon, sums[horizon as usize]));
    }
    let mut doubling_increments = Vec::new();
    let mut n = 1;
    while 2 * n <= horizon {
        doubling_increments.push((n, sums[2 * n as usize] - sums[n as usize]));
        n *= 2;
    }
    let tail: Vec<f64> = doubling_increments.iter().rev().take(3).map(|p| p.1).collect();
    let trend = if tail.len() < 3 {
        Trend::Inconclusive
    } else if tail.iter().all(|&d| d >= threshold) {
        Trend::DivergingLike
    } else if tail.iter().all(|&d| d < threshold) {
        Trend::ConvergingLike
    } else {
        Trend::Inconclusive
    };
    Ok(QuasiReport {
        horizon,
        threshold,
        partial_sums,
        doubling_increments,
        trend,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub horizon: u64,
    /// `sup_{1≤k≤K} (N_k/M_k)^{1/k}`.
    pub sup_ratio_root: LogMagnitude,
    /// `inf_{1≤k≤K} (N_k/M_k)^{1/k}`.
    pub inf_ratio_root: LogMagnitude,
    /// `ln (N_k/M_k)^{1/k}` at `k = K/4, K/2, K`.
    pub trend_logs: [f64; 3],
    pub verdict: Verdict,
}

/// Cartan-Mandelbrojt comparison of `C_N` against `C_M` over `1 ≤ k ≤ K`.
///
/// The verdict reads the trend of `t_k = (N_k/M_k)^{1/k}` at `K/4, K/2, K`:
/// strictly increasing by at least `0.05` in log at both doublings means
/// not contained; strictly decreasing likewise means strictly contained; a
/// flat tail (change below `0.05`) means contained.
pub fn compare(n: &WeightSequence, m: &WeightSequence, horizon: u64) -> Result<ComparisonReport> {
    if horizon < 4 {
        return Err(Error::usage("comparison needs K >= 4"));
    }
    const STEP: f64 = 0.05;
    let t = |k: u64| -> Result<f64> { Ok((n.log_m(k)? - m.log_m(k)?) / k as f64) };
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for k in 1..=horizon {
        let v = t(k)?;
        sup = sup.max(v);
        inf = inf.min(v);
    }
    let logs = [t(horizon / 4)?, t(horizon / 2)?, t(horizon)?];
    let (d1, d2) = (logs[1] - logs[0], logs[2] - logs[1]);
    let verdict = if d1 >= STEP && d2 >= STEP {
        Verdict::NotContainedDiagnostic
    } else if d1 <= -STEP && d2 <= -STEP {
        Verdict::StrictlyContainedDiagnostic
    } else if d2.abs() < STEP {
        Verdict::Contained
    } else {
        Verdict::Inconclusive
    };
    Ok(ComparisonReport {
        horizon,
        sup_ratio_root: LogMagnitude::from_log(sup),
        inf_ratio_root: LogMagnitude::from_log(inf),
        trend_logs: logs,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareShiftReport {
    pub horizon: u64,
    /// `ln (M_k^{1+1/k}/M_{k+1})` for `k = 1..=K`.
    pub regularity_logs: Vec<f64>,
    /// `ln (M_k²/M_{2k})^{1/k}` for `k = 1..=K`.
    pub square_shift_logs: Vec<f64>,
    pub inf_regularity: LogMagnitude,
    pub inf_square_shift: LogMagnitude,
    /// Indices where `(M_k²/M_{2k})^{1/k} ≤ M_k^{1+1/k}/M_{k+1}` fails beyond `1e-12`.
    pub inequality_violations: Vec<u64>,
    /// Indices where `M_k² ≤ M_{2k}` fails beyond `1e-12`.
    pub square_violations: Vec<u64>,
}

/// The two sequences governing `C_{M²}` vs `C_{M^{(2)}}` and the inequality between them.
pub fn square_vs_shift_diagnostic(m: &WeightSequence, horizon: u64) -> Result<SquareShiftReport> {
    if horizon < 1 {
        return Err(Error::usage("square/shift diagnostic needs K >= 1"));
    }
    let mut regularity_logs = Vec::with_capacity(horizon as usize);
    let mut square_shift_logs = Vec::with_capacity(horizon as usize);
    let mut inequality_violations = Vec::new();
    let mut square_violations = Vec::new();
    for k in 1..=horizon {
        let kf = k as f64;
        let lk = m.log_m(k)?;
        let reg = lk / kf - m.log_ratio(k)?;
        let sq_num = 2.0 * lk - m.log_m(2 * k)?;
        let sq = sq_num / kf;
        let scale = lk.abs().max(1.0) / kf;
        if sq > reg + LOG_TOL * scale.max(reg.abs()) {
            inequality_violations.push(k);
        }
        if sq_num > LOG_TOL * lk.abs().max(1.0) {
            square_violations.push(k);
        }
        regularity_logs.push(reg);
        square_shift_logs.push(sq);
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SquareShiftReport {
        horizon,
        inf_regularity: LogMagnitude::from_log(min(&regularity_logs)),
        inf_square_shift: LogMagnitude::from_log(min(&square_shift_logs)),
        regularity_logs,
        square_shift_logs,
        inequality_violations,
        square_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::factorial::ln_factorial;

    fn g(s: f64) -> WeightSequence {
        WeightSequence::gevrey(s).unwrap()
    }

    #[test]
    fn closure_examples() {
        let a = closure_diagnostic(&WeightSequence::analytic(), 50).unwrap();
        assert_eq!(a.sup.to_f64(), 1.0);
        let r = closure_diagnostic(&g(1.0), 100).unwrap();
        // (k+1)^{1/k} peaks at k = 1
        assert!((r.sup.to_f64() - 2.0).abs() < 1e-14);
        assert!(r.sup.to_f64() <= 4.0);
        let oracle: Vec<f64> = (1..=100).map(|k: u64| ((k + 1) as f64).powf(1.0 / k as f64)).collect();
        assert!(oracle.windows(2).all(|w| w[1] < w[0]));
        assert!((r.last.to_f64() - oracle[99]).abs() < 1e-14);
    }

    #[test]
    fn quasianalyticity_examples() {
        let a = quasianalyticity_diagnostic(&WeightSequence::analytic(), 1024, DEFAULT_TREND_THRESHOLD).unwrap();
        assert_eq!(a.trend, Trend::DivergingLike);
        let h: f64 = (1..=1024).map(|k| 1.0 / k as f64).sum::<f64>() + 1.0 / 1025.0;
        assert!((a.partial_sums.last().unwrap().1 - h).abs() < 1e-12);

        let r = quasianalyticity_diagnostic(&g(1.0), 1024, DEFAULT_TREND_THRESHOLD).unwrap();
        assert_eq!(r.trend, Trend::ConvergingLike);
        let closed: f64 = (0..=1024).map(|k| 1.0 / ((k + 1) as f64).powi(2)).sum();
        assert!((r.partial_sums.last().unwrap().1 - closed).abs() < 1e-12);

        let lp = WeightSequence::log_power(std::f64::consts::E).unwrap();
        let q = quasianalyticity_diagnostic(&lp, 100_000, DEFAULT_TREND_THRESHOLD).unwrap();
        assert_eq!(q.trend, Trend::DivergingLike);
    }

    #[test]
    fn compare_examples() {
        let a = WeightSequence::analytic();
        let r = compare(&a, &g(1.0), 200).unwrap();
        assert_eq!(r.verdict, Verdict::StrictlyContainedDiagnostic);
        assert!(r.sup_ratio_root.to_f64() <= 1.0);
        let inf_oracle = (-ln_factorial(200) / 200.0).exp();
        assert!((r.inf_ratio_root.to_f64() - inf_oracle).abs() < 1e-12);

        let same = compare(&g(1.0), &g(1.0), 200).unwrap();
        assert_eq!(same.sup_ratio_root, LogMagnitude::ONE);
        assert_eq!(same.inf_ratio_root, LogMagnitude::ONE);
        assert_eq!(same.verdict, Verdict::Contained);

        let up = compare(&g(2.0), &g(1.0), 200).unwrap();
        assert_eq!(up.verdict, Verdict::NotContainedDiagnostic);
        assert!(up.inf_ratio_root <= up.sup_ratio_root);
    }

    #[test]
    fn square_shift_examples() {
        let a = square_vs_shift_diagnostic(&WeightSequence::analytic(), 50).unwrap();
        assert!(a.regularity_logs.iter().chain(&a.square_shift_logs).all(|&v| v == 0.0));
        let r = square_vs_shift_diagnostic(&g(1.0), 100).unwrap();
        assert!(r.inequality_violations.is_empty());
        assert!(r.square_violations.is_empty());
        // (k!)^{1/k}/(k+1) → 1/e from above; the infimum sits at the horizon
        let k = 100.0;
        let oracle = (ln_factorial(100) / k).exp() / (k + 1.0);
        assert!((r.inf_regularity.to_f64() - oracle).abs() < 1e-12);
        assert!(oracle > 1.0 / std::f64::consts::E);
    }
}
