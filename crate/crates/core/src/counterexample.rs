//! A sequence `M_k = L_k^k` with a piecewise-constant root `L`, stepping
//! through the slow sequence `v_n = Π_{j≤n}(1 + 1/√j)` on a sparse even index
//! schedule `Λ`, and finite-stage checks of its claimed properties.
//!
//! Schedule: `λ₀ = 0`, then pairs `{μ_j, 2μ_j}`. The first pair is padded to
//! `{6, 8, 10, 12}` so that `L_6/L_12 = v₁/v₄` is already small; later pairs
//! are bare. Between pairs the gap obeys `ln μ_{j+1} − ln 2μ_j ≥ v_b²` where
//! `b` is the block starting at `2μ_j`. A terminal entry closes the last gap.
//! Indices quickly exceed 64 bits; they are kept as `BigUint`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::ln_biguint;
use crate::weights::{StepPower, Trend, WeightSequence};

pub const DEFAULT_PAIRS: usize = 8;
/// Index range scanned by the verification reports by default.
pub const DEFAULT_HORIZON: u64 = 5000;
/// Largest bit length accepted for a schedule entry.
pub const MAX_INDEX_BITS: u64 = 1 << 26;

const PADDED_FIRST_GROUP: [u64; 4] = [6, 8, 10, 12];

/// `ln v_n` for `n = 0..=count`, with `v₀ = 1`.
pub fn slow_log_values(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..=count {
        acc += (1.0 / (j as f64).sqrt()).ln_1p();
        out.push(acc);
    }
    out
}

/// Finite-range behaviour of `v`.
#[derive(Debug, Clone, Serialize)]
pub struct SlowSequenceReport {
    pub first_values: Vec<f64>,
    /// `v_{n+1}/v_n = 1 + 1/√(n+1)` is decreasing (toward 1) over the range.
    pub step_ratio_decreasing: bool,
    /// `v_{2n}/v_n` is increasing over the range.
    pub doubling_ratio_increasing: bool,
    pub last_doubling_ratio: f64,
    pub range: usize,
}

pub fn slow_sequence_report(range: usize) -> SlowSequenceReport {
    let lv = slow_log_values(2 * range);
    let steps: Vec<f64> = (0..range).map(|n| lv[n + 1] - lv[n]).collect();
    let doubling: Vec<f64> = (1..=range).map(|n| lv[2 * n] - lv[n]).collect();
    SlowSequenceReport {
        first_values: lv.iter().take(6).map(|l| l.exp()).collect(),
        step_ratio_decreasing: steps.windows(2).all(|w| w[1] < w[0]),
        doubling_ratio_increasing: doubling.windows(2).all(|w| w[1] > w[0]),
        last_doubling_ratio: doubling.last().map_or(1.0, |d| d.exp()),
        range,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSchedule {
    /// Strictly increasing even entries, `λ₀ = 0`, last entry terminal.
    #[serde(serialize_with = "serialize_biguints")]
    pub lambda: Vec<BigUint>,
    /// `(index of μ_j, index of 2μ_j)` in `lambda`.
    pub pairs: Vec<(usize, usize)>,
}

fn serialize_biguints<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.bits() <= 64 {
            seq.serialize_element(&x.to_string())?;
        } else {
            seq.serialize_element(&format!("2^{:.6}", log2_biguint(x)))?;
        }
    }
    seq.end()
}

fn log2_biguint(x: &BigUint) -> f64 {
    ln_biguint(x) / std::f64::consts::LN_2
}

/// Smallest `t` with `2^t ≥ x` (`0` for `x ≤ 1`).
fn ceil_log2(x: &BigUint) -> u64 {
    if x <= &BigUint::one() {
        0
    } else {
        (x - 1u32).bits()
    }
}

impl LambdaSchedule {
    /// Number of blocks `[λ_n, λ_{n+1})`, the last one unbounded.
    pub fn blocks(&self) -> usize {
        self.lambda.len()
    }

    /// `|Λ ∩ 2Λ|` within the schedule.
    pub fn doubled_count(&self) -> usize {
        self.lambda
            .iter()
            .filter(|l| !l.is_zero() && !l.bit(0) && self.lambda.binary_search(&(*l >> 1usize)).is_ok())
            .count()
    }

    /// `log₂ λ_{n+1} − log₂ λ_n` for `n ≥ 1`.
    pub fn log2_gap(&self, n: usize) -> f64 {
        let (a, b) = (&self.lambda[n], &self.lambda[n + 1]);
        // exact powers of two between consecutive entries are common
        if (b % a).is_zero() {
            let q = b / a;
            if q.count_ones() == 1 {
                return (q.bits() - 1) as f64;
            }
        }
        log2_biguint(b) - log2_biguint(a)
    }
}

/// Builds the schedule for `pairs ≥ 1` pairs.
pub fn build_lambda(pairs: usize) -> Result<LambdaSchedule> {
    if pairs == 0 {
        return Err(Error::usage("the schedule needs at least one pair"));
    }
    let mut lambda: Vec<BigUint> = vec![BigUint::zero()];
    lambda.extend(PADDED_FIRST_GROUP.iter().map(|&x| BigUint::from(x)));
    let mut pair_idx = vec![(1, PADDED_FIRST_GROUP.len())];
    // enough v values for every block we may create, plus one
    let log_v = slow_log_values(PADDED_FIRST_GROUP.len() + 2 * pairs + 2);
    for j in 1..=pairs {
        let b = lambda.len() - 1;
        let v2 = (2.0 * log_v[b]).exp();
        let e = (v2 / std::f64::consts::LN_2 * (1.0 + 1e-12)).ceil() as u64 + 1;
        let next = &lambda[b] << e;
        if next.bits() > MAX_INDEX_BITS {
            return Err(Error::Horizon {
                k: next.bits(),
                horizon: MAX_INDEX_BITS,
            });
        }
        if j == pairs {
            lambda.push(next);
        } else {
            lambda.push(next.clone());
            lambda.push(next << 1u32);
            pair_idx.push((lambda.len() - 2, lambda.len() - 1));
        }
    }
    Ok(LambdaSchedule {
        lambda,
        pairs: pair_idx,
    })
}

/// The built sequence and its schedule.
#[derive(Debug, Clone)]
pub struct CounterexampleSequence {
    pub schedule: LambdaSchedule,
    /// `ln v_n` per block.
    pub log_v: Vec<f64>,
    starts: Vec<u64>,
    seq: WeightSequence,
}

pub fn build_counterexample(pairs: usize) -> Result<CounterexampleSequence> {
    let schedule = build_lambda(pairs)?;
    let log_v = slow_log_values(schedule.blocks());
    let log_v = log_v[..schedule.blocks()].to_vec();
    let starts: Vec<u64> = schedule.lambda.iter().map_while(|l| l.to_u64()).collect();
    let table = StepPower {
        starts: starts.clone(),
        levels: log_v[..starts.len()].to_vec(),
        horizon: u64::MAX - 1,
    };
    let seq = WeightSequence::step_power(table, format!("counterexample:{pairs}"));
    Ok(CounterexampleSequence {
        schedule,
        log_v,
        starts,
        seq,
    })
}

/// One row of the `counterexample` CSV.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleRow {
    pub k: u64,
    pub a_k: f64,
    pub b_k: f64,
    pub g_k: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogConvexViolation {
    pub k: u64,
    /// `a_{k+1} − a_k = c·ln(v_n/v_{n−1})`; a violation has `c < 0`.
    pub coefficient: i64,
    pub a_k: f64,
    pub a_next: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogConvexReport {
    pub horizon: u64,
    pub within_block_constant: bool,
    /// `a_{λ_n} ≥ a_{λ_n − 1}` at every boundary in range.
    pub boundary_increase: bool,
    pub violations: usize,
    pub first_violations: Vec<LogConvexViolation>,
    /// First violation found by the generic floating-point validation.
    pub generic_first_violation: Option<u64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffClosedReport {
    pub horizon: u64,
    pub max_b: f64,
    pub argmax_b: u64,
    pub bound: f64,
    /// `k` with `b_k > (L_{k+1}/L_k)²`.
    pub ratio_square_violations: usize,
    pub first_ratio_square_violation: Option<u64>,
    /// `max_n (v_n/v_{n−1})²` over the schedule.
    pub max_boundary_ratio_square: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiDiagReport {
    pub horizon: u64,
    /// `(N, Σ_{n≤N} 1/(n L_{2n}²))` at powers of two and at the horizon.
    pub direct_partial_sums: Vec<(u64, f64)>,
    /// `(t, Σ_{2≤s≤t} 1/L_{2^s}²)` at block ends.
    pub dyadic_partial_sums: Vec<(u64, f64)>,
    /// `Σ_{n<2^J} 1/(n L_{2n}²) ≥ ½ Σ_{s=2}^{J} 1/L_{2^s}²` for every `J` in range.
    pub half_dyadic_link: bool,
    /// The same without the factor ½.
    pub full_dyadic_link: bool,
    /// Cumulative `Σ_{2≤s, 2^s<λ_{N+1}} 1/L_{2^s}² ≥ Σ_{n=1}^{N} (log₂λ_{n+1} − log₂λ_n)/v_n²`.
    pub chain_cumulative: bool,
    /// Per block: the dyadic contribution dominates the gap term.
    pub chain_termwise: Vec<bool>,
    /// Gap series `Σ (log₂λ_{n+1} − log₂λ_n)/v_n²` after each pair's following gap.
    pub gap_partial_sums_by_pair: Vec<f64>,
    /// The same series with natural logarithms.
    pub gap_partial_sums_by_pair_ln: Vec<f64>,
    pub gap_linear_growth: bool,
    pub trend: Trend,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrictGapReport {
    pub horizon: u64,
    pub max_identity_error: f64,
    pub identity_holds: bool,
    /// First `k` with `g_k = 1` exactly (`k` and `2k` in one block).
    pub first_unit: Option<u64>,
    /// Smallest `g_k` and where.
    pub min_g: f64,
    pub argmin_g: u64,
    pub has_small: bool,
    pub in_unit_interval: bool,
    pub pass: bool,
}

impl CounterexampleSequence {
    pub fn weight_sequence(&self) -> WeightSequence {
        self.seq.clone()
    }

    fn block(&self, k: u64) -> usize {
        self.starts.partition_point(|&s| s <= k) - 1
    }

    /// `ln L_k`.
    pub fn log_l(&self, k: u64) -> f64 {
        self.log_v[self.block(k)]
    }

    /// `a_k = ln M_k − ln M_{k−1}` for `k ≥ 1`.
    pub fn a(&self, k: u64) -> f64 {
        k as f64 * self.log_l(k) - (k - 1) as f64 * self.log_l(k - 1)
    }

    /// `ln b_k = (ln M_{k+1} − ln M_k)/k` for `k ≥ 1`.
    pub fn log_b(&self, k: u64) -> f64 {
        ((k + 1) as f64 * self.log_l(k + 1) - k as f64 * self.log_l(k)) / k as f64
    }

    /// `ln g_k = 2(ln L_k − ln L_{2k})`.
    pub fn log_g(&self, k: u64) -> f64 {
        2.0 * (self.log_l(k) - self.log_l(2 * k))
    }

    pub fn rows(&self, horizon: u64) -> Vec<CounterexampleRow> {
        (1..=horizon)
            .map(|k| CounterexampleRow {
                k,
                a_k: self.a(k),
                b_k: self.log_b(k).exp(),
                g_k: self.log_g(k).exp(),
            })
            .collect()
    }

    /// Checks that `a_k` is nondecreasing for `1 ≤ k ≤ K`.
    ///
    /// Entries are even, so a window `k−1, k, k+1` meets at most one block
    /// boundary and `a_{k+1} − a_k` is an integer multiple of
    /// `ln(v_n/v_{n−1}) > 0`. The sign of that integer decides each comparison exactly.
    pub fn verify_log_convex(&self, horizon: u64) -> Result<LogConvexReport> {
        let mut within = true;
        let mut boundary_increase = true;
        let mut violations = 0;
        let mut first = Vec::new();
        for k in 1..horizon {
            let (b0, b1, b2) = (self.block(k - 1), self.block(k), self.block(k + 1));
            let c: i64 = if b0 == b1 && b1 == b2 {
                0
            } else if b0 == b1 {
                // entering block b2 at k + 1
                let c = k as i64 + 1;
                boundary_increase &= c > 0;
                c
            } else {
                // k = λ_n
                -(k as i64 - 1)
            };
            if b0 == b1 && b1 == b2 && self.a(k) != self.a(k + 1) && (self.a(k) - self.a(k + 1)).abs() > 1e-9 {
                within = false;
            }
            if c < 0 {
                violations += 1;
                if first.len() < 10 {
                    first.push(LogConvexViolation {
                        k,
                        coefficient: c,
                        a_k: self.a(k),
                        a_next: self.a(k + 1),
                    });
                }
            }
        }
        Ok(LogConvexReport {
            horizon,
            within_block_constant: within,
            boundary_increase,
            violations,
            first_violations: first,
            generic_first_violation: self.seq.first_log_convexity_violation(horizon)?,
            pass: violations == 0,
        })
    }

    /// `b_k = (M_{k+1}/M_k)^{1/k} ≤ 4` for `1 ≤ k ≤ K`, and the finer claim `b_k ≤ (L_{k+1}/L_k)²`.
    pub fn verify_diff_closed(&self, horizon: u64) -> Result<DiffClosedReport> {
        let (mut max_b, mut argmax) = (f64::NEG_INFINITY, 1);
        let mut square_violations = 0;
        let mut first_square = None;
        for k in 1..=horizon {
            let lb = self.log_b(k);
            if lb > max_b {
                max_b = lb;
                argmax = k;
            }
            let sq = 2.0 * (self.log_l(k + 1) - self.log_l(k));
            if lb > sq + 1e-12 {
                square_violations += 1;
                first_square.get_or_insert(k);
            }
        }
        let max_boundary = (1..self.log_v.len())
            .map(|n| 2.0 * (self.log_v[n] - self.log_v[n - 1]))
            .fold(0.0, f64::max)
            .exp();
        Ok(DiffClosedReport {
            horizon,
            max_b: max_b.exp(),
            argmax_b: argmax,
            bound: 4.0,
            ratio_square_violations: square_violations,
            first_ratio_square_violation: first_square,
            max_boundary_ratio_square: max_boundary,
            pass: max_b <= 4f64.ln(),
        })
    }

    /// Partial sums of `Σ 1/(n L_{2n}²)`, its dyadic minorant, and the gap series.
    pub fn verify_quasianalytic_diag(&self, horizon: u64) -> Result<QuasiDiagReport> {
        if horizon < 2 {
            return Err(Error::usage("quasianalyticity diagnostic needs K >= 2"));
        }
        // direct sum, with checkpoints
        let mut direct = Vec::new();
        let mut at_pow2 = Vec::new();
        let mut s = 0.0;
        for n in 1..=horizon {
            s += (-2.0 * self.log_l(2 * n)).exp() / n as f64;
            if (n + 1).is_power_of_two() {
                at_pow2.push((n + 1, s));
            }
            if n.is_power_of_two() || n == horizon {
                direct.push((n, s));
            }
        }
        // dyadic terms: 2^s lies in block n for t_lo(n) ≤ s < t_lo(n+1)
        let lam = &self.schedule.lambda;
        let t_lo: Vec<u64> = lam.iter().map(ceil_log2).collect();
        let dyadic_up_to = |t: u64| -> f64 {
            let mut acc = 0.0;
            for n in 0..lam.len() {
                let lo = t_lo[n].max(2);
                let hi = if n + 1 < lam.len() { t_lo[n + 1].min(t + 1) } else { t + 1 };
                if hi > lo {
                    acc += (hi - lo) as f64 * (-2.0 * self.log_v[n]).exp();
                }
            }
            acc
        };
        let mut half_link = true;
        let mut full_link = true;
        for &(n_end, direct_sum) in &at_pow2 {
            // Σ_{n < 2^J} vs the dyadic terms 2^s with s ≤ J
            let j = n_end.trailing_zeros() as u64;
            let d = dyadic_up_to(j);
            half_link &= direct_sum + 1e-15 >= 0.5 * d;
            full_link &= direct_sum + 1e-15 >= d;
        }

        let mut dyadic = Vec::new();
        let mut chain_cumulative = true;
        let mut chain_termwise = Vec::new();
        let mut gap_sum = 0.0;
        let mut gap_sums = Vec::new();
        for n in 1..lam.len() - 1 {
            let inv_v2 = (-2.0 * self.log_v[n]).exp();
            gap_sum += self.schedule.log2_gap(n) * inv_v2;
            gap_sums.push(gap_sum);
            let t_end = t_lo[n + 1].saturating_sub(1);
            let d = dyadic_up_to(t_end);
            dyadic.push((t_end, d));
            chain_cumulative &= d + 1e-12 >= gap_sum;
            let count = t_lo[n + 1].saturating_sub(t_lo[n].max(2)) as f64;
            chain_termwise.push(count + 1e-12 >= self.schedule.log2_gap(n));
        }
        // the gap following pair j ends at the next pair's μ (or the terminal entry)
        let mut by_pair = Vec::new();
        let mut by_pair_ln = Vec::new();
        for &(_, two_mu) in &self.schedule.pairs {
            if two_mu < gap_sums.len() + 1 {
                by_pair.push(gap_sums[two_mu - 1]);
                by_pair_ln.push(gap_sums[two_mu - 1] * std::f64::consts::LN_2);
            }
        }
        let linear = by_pair.iter().enumerate().all(|(j, &g)| g >= 0.9 * (j + 1) as f64);
        let trend = if linear && !by_pair.is_empty() {
            Trend::DivergingLike
        } else {
            Trend::Inconclusive
        };
        Ok(QuasiDiagReport {
            horizon,
            direct_partial_sums: direct,
            dyadic_partial_sums: dyadic,
            half_dyadic_link: half_link,
            full_dyadic_link: full_link,
            chain_cumulative,
            chain_termwise,
            gap_partial_sums_by_pair: by_pair,
            gap_partial_sums_by_pair_ln: by_pair_ln,
            gap_linear_growth: linear,
            trend,
            pass: linear && half_link && chain_cumulative,
        })
    }

    /// `g_k = (M_k²/M_{2k})^{1/k} = (L_k/L_{2k})²` for `1 ≤ k ≤ K`.
    pub fn verify_strict_gap(&self, horizon: u64) -> Result<StrictGapReport> {
        let mut max_err: f64 = 0.0;
        let mut first_unit = None;
        let (mut min_g, mut argmin) = (f64::INFINITY, 1);
        let mut in_unit = true;
        for k in 1..=horizon {
            let direct = (2.0 * self.seq.log_m(k)? - self.seq.log_m(2 * k)?) / k as f64;
            let lg = self.log_g(k);
            max_err = max_err.max((direct - lg).abs());
            if self.block(k) == self.block(2 * k) {
                first_unit.get_or_insert(k);
            }
            if lg < min_g {
                min_g = lg;
                argmin = k;
            }
            in_unit &= lg <= 0.0;
        }
        let identity_holds = max_err <= 1e-12;
        let has_small = min_g <= 0.1f64.ln();
        Ok(StrictGapReport {
            horizon,
            max_identity_error: max_err,
            identity_holds,
            first_unit,
            min_g: min_g.exp(),
            argmin_g: argmin,
            has_small,
            in_unit_interval: in_unit,
            pass: identity_holds && first_unit.is_some() && has_small && in_unit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn built() -> CounterexampleSequence {
        build_counterexample(DEFAULT_PAIRS).unwrap()
    }

    #[test]
    fn slow_values() {
        // direct products
        let v1 = 2.0;
        let v2 = v1 * (1.0 + 1.0 / 2f64.sqrt());
        let v3 = v2 * (1.0 + 1.0 / 3f64.sqrt());
        let lv = slow_log_values(3);
        assert_eq!(lv[0], 0.0);
        for (l, v) in lv[1..].iter().zip([v1, v2, v3]) {
            assert!((l.exp() - v).abs() < 1e-13 * v);
        }
        assert!((v2 - 3.41421).abs() < 1e-5);
        assert!((v3 - 5.385411).abs() < 1e-6);
        let r = slow_sequence_report(1000);
        assert!(r.step_ratio_decreasing);
        assert!(r.doubling_ratio_increasing);
    }

    #[test]
    fn schedule_shape() {
        let s = build_lambda(DEFAULT_PAIRS).unwrap();
        assert!(s.lambda[0].is_zero());
        assert!(s.lambda.windows(2).all(|w| w[0] < w[1]));
        assert!(s.lambda.iter().all(|l| !l.bit(0)));
        assert_eq!(s.pairs.len(), DEFAULT_PAIRS);
        for &(a, b) in &s.pairs {
            assert_eq!(&s.lambda[a] << 1u32, s.lambda[b]);
        }
        assert!(s.doubled_count() >= DEFAULT_PAIRS);
        assert_eq!(s.blocks(), 1 + 4 + 2 * (DEFAULT_PAIRS - 1) + 1);
        assert!(build_lambda(0).is_err());
    }

    #[test]
    fn gaps_meet_the_squared_level() {
        let c = built();
        let s = &c.schedule;
        for &(_, two_mu) in &s.pairs {
            if two_mu + 1 < s.lambda.len() {
                let gap_ln = s.log2_gap(two_mu) * std::f64::consts::LN_2;
                assert!(gap_ln >= (2.0 * c.log_v[two_mu]).exp());
            }
        }
    }

    #[test]
    fn step_definition() {
        let c = built();
        let m = c.weight_sequence();
        for k in 0..6 {
            assert_eq!(m.log_m(k).unwrap(), 0.0);
        }
        // M_{λ₁} = v₁^{λ₁}
        assert!((m.log_m(6).unwrap() - 6.0 * 2f64.ln()).abs() < 1e-14);
        assert!(!m.is_validated());
    }

    #[test]
    fn log_convexity_fails_right_after_each_boundary() {
        let c = built();
        let r = c.verify_log_convex(DEFAULT_HORIZON).unwrap();
        assert!(r.within_block_constant);
        assert!(r.boundary_increase);
        assert!(!r.pass);
        // boundaries at 6, 8, 10, 12 inside the range
        assert_eq!(r.violations, 4);
        assert_eq!(r.first_violations[0].k, 6);
        assert!(r.first_violations[0].a_next < r.first_violations[0].a_k);
        assert_eq!(r.generic_first_violation, Some(6));
    }

    #[test]
    fn derivative_ratio_bounded() {
        let c = built();
        let r = c.verify_diff_closed(DEFAULT_HORIZON).unwrap();
        assert!(r.pass);
        assert!(r.max_b <= 4.0);
        assert!(r.max_boundary_ratio_square <= 4.0 + 1e-12);
        // off-boundary b_k = L^{1/k} > 1 = (L_{k+1}/L_k)²
        assert!(r.ratio_square_violations > 0);
    }

    #[test]
    fn quasianalytic_diagnostic() {
        let c = built();
        let r = c.verify_quasianalytic_diag(DEFAULT_HORIZON).unwrap();
        assert!(r.gap_linear_growth, "{:?}", r.gap_partial_sums_by_pair);
        assert!(r.half_dyadic_link);
        assert!(r.chain_cumulative);
        assert_eq!(r.trend, Trend::DivergingLike);
        assert!(r.pass);
    }

    #[test]
    fn strict_gap() {
        let c = built();
        let r = c.verify_strict_gap(DEFAULT_HORIZON).unwrap();
        assert!(r.identity_holds, "{}", r.max_identity_error);
        assert_eq!(r.first_unit, Some(1));
        assert!(r.has_small);
        // k = 5 sits in the first block while 10 is already in the third
        assert_eq!(r.argmin_g, 5);
        assert!(r.pass);
    }

    #[test]
    fn parse_registers_family() {
        let m = WeightSequence::parse("counterexample:3").unwrap();
        assert_eq!(m.spec(), "counterexample:3");
        // entering the first block: M_6/M_5 = 2^6
        assert!((m.log_ratio(5).unwrap() - 6.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rows_match_definitions() {
        let c = built();
        let rows = c.rows(20);
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].g_k, 1.0);
        assert!((rows[5].g_k - (2.0 / c.log_v[4].exp()).powi(2)).abs() < 1e-14);
    }
}
