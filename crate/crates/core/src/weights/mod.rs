//! Weight sequences `M = (M_k)` for Denjoy-Carleman classes and their diagnostics.
//!
//! A [`WeightSequence`] is queried lazily through `ln M_k` and
//! `ln m_k = ln(M_{k+1}/M_k)`. Families with rational values also expose an
//! exact backing for certificate computations.

mod density;
mod diagnostics;

use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::numerics::{factorial, pow_rational, LogMagnitude};

pub use density::{density_estimate, lambda_eps, AbelCheck, DensityReport};
pub use diagnostics::{
    closure_diagnostic, compare, quasianalyticity_diagnostic, square_vs_shift_diagnostic,
    ClosureReport, ComparisonReport, QuasiReport, SquareShiftReport, Trend, Verdict,
    DEFAULT_TREND_THRESHOLD,
};

/// Horizon up to which `log_power` sequences are checked for log-convexity on construction.
pub const LOG_POWER_HORIZON: u64 = 10_000;

/// Relative slack allowed when comparing consecutive log-ratios computed in floating point.
const RATIO_SLACK: f64 = 1e-12;

/// Prefix of `ln M_k` values kept in memory per sequence.
const MEMO_LIMIT: u64 = 1 << 16;

/// Piecewise-constant root sequence: `M_k = L_k^k` with `ln L_k = levels[n]`
/// for `starts[n] ≤ k < starts[n+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPower {
    /// Block start indices; `starts[0] == 0`, strictly increasing.
    pub starts: Vec<u64>,
    /// `ln L` on each block.
    pub levels: Vec<f64>,
    /// Largest index the table describes.
    pub horizon: u64,
}

impl StepPower {
    pub fn block_of(&self, k: u64) -> usize {
        self.starts.partition_point(|&s| s <= k) - 1
    }
}

#[derive(Debug, Clone)]
enum Family {
    Analytic,
    Gevrey(f64),
    LogPower(f64),
    Custom(Arc<Vec<f64>>),
    Shift(u64, Box<WeightSequence>),
    Power(f64, Box<WeightSequence>),
    StepPower(Arc<StepPower>),
}

/// A positive sequence with `M₀ = 1`, stored through `ln M_k`.
///
/// Sequences built through the checked constructors are log-convex
/// (`m_k` nondecreasing) over their validation horizon. [`WeightSequence::new_unchecked`]
/// skips that check and marks the sequence as unvalidated; downstream code
/// (e.g. the Ostrowski scan) then avoids relying on log-convexity.
#[derive(Clone)]
pub struct WeightSequence {
    family: Family,
    spec: String,
    validated: bool,
    memo: Arc<RwLock<Vec<f64>>>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("spec", &self.spec)
            .field("validated", &self.validated)
            .finish()
    }
}

impl PartialEq for WeightSequence {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl WeightSequence {
    fn build(family: Family, spec: String, validated: bool) -> Self {
        WeightSequence {
            family,
            spec,
            validated,
            memo: Arc::new(RwLock::new(vec![0.0])),
        }
    }

    /// `M_k = 1`.
    pub fn analytic() -> Self {
        Self::build(Family::Analytic, "analytic".into(), true)
    }

    /// `M_k = (k!)^s`.
    pub fn gevrey(s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::domain(format!("gevrey exponent must be >= 0, got {s}")));
        }
        Ok(Self::build(Family::Gevrey(s), format!("gevrey:{s}"), true))
    }

    /// `M_k = (ln(k + c))^k`, validated for log-convexity up to [`LOG_POWER_HORIZON`].
    pub fn log_power(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= std::f64::consts::E) {
            return Err(Error::domain(format!("log_power offset must be >= e, got {c}")));
        }
        let seq = Self::build(Family::LogPower(c), format!("logpow:{c}"), true);
        seq.validate(LOG_POWER_HORIZON)?;
        Ok(seq)
    }

    /// Sequence given by a table of `ln M_k`, `k = 0..n`; validated on load.
    pub fn custom(log_values: Vec<f64>) -> Result<Self> {
        let seq = Self::custom_unchecked(log_values)?;
        let horizon = seq.horizon().unwrap_or(0);
        if horizon >= 1 {
            seq.validate(horizon - 1)?;
        }
        Ok(WeightSequence {
            validated: true,
            ..seq
        })
    }

    fn custom_unchecked(log_values: Vec<f64>) -> Result<Self> {
        match log_values.first() {
            None => return Err(Error::domain("empty custom table")),
            Some(&v) if v != 0.0 => {
                return Err(Error::domain(format!("custom table needs ln M_0 = 0, got {v}")))
            }
            _ => {}
        }
        if let Some(bad) = log_values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite custom entry {bad}")));
        }
        let spec = format!("custom[{}]", log_values.len());
        Ok(Self::build(
            Family::Custom(Arc::new(log_values)),
            spec,
            false,
        ))
    }

    /// Reads a custom table: whitespace- or comma-separated `ln M_k` values.
    pub fn custom_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::usage(format!("bad custom entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut seq = Self::custom(values)?;
        seq.spec = format!("custom:{}", path.display());
        Ok(seq)
    }

    /// Step-root sequence `M_k = L_k^k`, not checked for log-convexity.
    pub fn step_power(table: StepPower, spec: impl Into<String>) -> Self {
        Self::build(Family::StepPower(Arc::new(table)), spec.into(), false)
    }

    /// Marks an arbitrary sequence as unvalidated (log-convexity is not assumed).
    pub fn new_unchecked(mut self) -> Self {
        self.validated = false;
        self
    }

    /// `M^{(p)}_k = M_{pk}`.
    pub fn shift(&self, p: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::domain("shift factor must be >= 1"));
        }
        if p == 1 {
            return Ok(self.clone());
        }
        Ok(Self::build(
            Family::Shift(p, Box::new(self.clone())),
            format!("shift:{p}:{}", self.spec),
            self.validated,
        ))
    }

    /// `(M^p)_k = M_k^p`.
    pub fn power(&self, p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::domain(format!("power must be >= 1, got {p}")));
        }
        if p == 1.0 {
            return Ok(self.clone());
        }
        Ok(Self::build(
            Family::Power(p, Box::new(self.clone())),
            format!("power:{p}:{}", self.spec),
            self.validated,
        ))
    }

    /// Parses a family spec such as `gevrey:1`, `logpow:2.72`, `shift:2:gevrey:1`,
    /// `power:2:analytic`, `counterexample:8` or `custom:<file>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = match spec.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (spec, None),
        };
        let number = |r: Option<&str>, what: &str| -> Result<f64> {
            let r = r.ok_or_else(|| Error::usage(format!("{what} needs a parameter")))?;
            r.parse::<f64>()
                .map_err(|_| Error::usage(format!("bad {what} parameter {r:?}")))
        };
        match head {
            "analytic" if rest.is_none() => Ok(Self::analytic()),
            "gevrey" => Self::gevrey(number(rest, "gevrey")?),
            "logpow" => Self::log_power(number(rest, "logpow")?),
            "shift" | "power" => {
                let r = rest.ok_or_else(|| Error::usage(format!("{head} needs p and a family")))?;
                let (p, inner) = r
                    .split_once(':')
                    .ok_or_else(|| Error::usage(format!("{head} needs p and a family")))?;
                let inner = Self::parse(inner)?;
                if head == "shift" {
                    let p = p
                        .parse::<u64>()
                        .map_err(|_| Error::usage(format!("bad shift factor {p:?}")))?;
                    inner.shift(p)
                } else {
                    let p = p
                        .parse::<f64>()
                        .map_err(|_| Error::usage(format!("bad power {p:?}")))?;
                    inner.power(p)
                }
            }
            "counterexample" => {
                let pairs = match rest {
                    None => crate::counterexample::DEFAULT_PAIRS,
                    Some(r) => r
                        .parse::<usize>()
                        .map_err(|_| Error::usage(format!("bad pair count {r:?}")))?,
                };
                Ok(crate::counterexample::build_counterexample(pairs)?.weight_sequence())
            }
            "custom" => {
                let path = rest.ok_or_else(|| Error::usage("custom needs a file path"))?;
                Self::custom_from_file(Path::new(path))
            }
            _ => Err(Error::usage(format!("unknown family spec {spec:?}"))),
        }
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    /// True when log-convexity has been established for this sequence.
    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Largest `k` for which `M_k` is defined, or `None` when unbounded.
    pub fn horizon(&self) -> Option<u64> {
        match &self.family {
            Family::Analytic | Family::Gevrey(_) | Family::LogPower(_) => None,
            Family::Custom(t) => Some(t.len() as u64 - 1),
            Family::Shift(p, base) => base.horizon().map(|h| h / p),
            Family::Power(_, base) => base.horizon(),
            Family::StepPower(t) => Some(t.horizon),
        }
    }

    fn check_horizon(&self, k: u64) -> Result<()> {
        match self.horizon() {
            Some(h) if k > h => Err(Error::Horizon { k, horizon: h }),
            _ => Ok(()),
        }
    }

    fn compute_log_m(&self, k: u64) -> Result<f64> {
        self.check_horizon(k)?;
        Ok(match &self.family {
            Family::Analytic => 0.0,
            Family::Gevrey(s) => s * ln_factorial(k),
            Family::LogPower(c) => {
                if k == 0 {
                    0.0
                } else {
                    k as f64 * (k as f64 + c).ln().ln()
                }
            }
            Family::Custom(t) => t[k as usize],
            Family::Shift(p, base) => {
                let idx = k.checked_mul(*p).ok_or(Error::Horizon {
                    k,
                    horizon: u64::MAX / p,
                })?;
                base.log_m(idx)?
            }
            Family::Power(p, base) => p * base.log_m(k)?,
            Family::StepPower(t) => k as f64 * t.levels[t.block_of(k)],
        })
    }

    /// `ln M_k`, memoized for small `k`.
    pub fn log_m(&self, k: u64) -> Result<f64> {
        if k < MEMO_LIMIT {
            if let Some(&v) = self.memo.read().expect("memo lock").get(k as usize) {
                return Ok(v);
            }
            let mut memo = self.memo.write().expect("memo lock");
            while memo.len() as u64 <= k {
                let next = memo.len() as u64;
                let v = self.compute_log_m(next)?;
                memo.push(v);
            }
            return Ok(memo[k as usize]);
        }
        self.compute_log_m(k)
    }

    /// `M_k` as a log-domain magnitude.
    pub fn weight(&self, k: u64) -> Result<LogMagnitude> {
        self.log_m(k).map(LogMagnitude::from_log)
    }

    /// `ln m_k = ln(M_{k+1}/M_k)`, evaluated per family without cancellation where possible.
    pub fn log_ratio(&self, k: u64) -> Result<f64> {
        self.check_horizon(k + 1)?;
        Ok(match &self.family {
            Family::Analytic => 0.0,
            Family::Gevrey(s) => s * ((k + 1) as f64).ln(),
            Family::LogPower(c) => {
                let kf = k as f64;
                let l1 = (kf + 1.0 + c).ln();
                if k == 0 {
                    l1.ln()
                } else {
                    let l0 = (kf + c).ln();
                    l1.ln() + kf * ((1.0 / (kf + c)).ln_1p() / l0).ln_1p()
                }
            }
            Family::Custom(t) => t[k as usize + 1] - t[k as usize],
            Family::Shift(p, base) => {
                let mut acc = 0.0;
                for j in 0..*p {
                    acc += base.log_ratio(k * p + j)?;
                }
                acc
            }
            Family::Power(p, base) => p * base.log_ratio(k)?,
            Family::StepPower(t) => {
                let (b0, b1) = (t.block_of(k), t.block_of(k + 1));
                let (l0, l1) = (t.levels[b0], t.levels[b1]);
                if b0 == b1 {
                    l1
                } else {
                    l1 + k as f64 * (l1 - l0)
                }
            }
        })
    }

    /// `m_k = M_{k+1}/M_k`.
    pub fn ratio(&self, k: u64) -> Result<LogMagnitude> {
        self.log_ratio(k).map(LogMagnitude::from_log)
    }

    /// Exact `M_k` for families with rational values.
    pub fn exact_m(&self, k: u64) -> Option<BigRational> {
        match &self.family {
            Family::Analytic => Some(BigRational::one()),
            Family::Gevrey(s) if s.fract() == 0.0 && *s <= 16.0 => {
                let f = BigRational::from_integer(factorial(k as usize));
                Some(pow_rational(&f, *s as usize))
            }
            Family::Shift(p, base) => base.exact_m(k.checked_mul(*p)?),
            Family::Power(p, base) if p.fract() == 0.0 && *p <= 16.0 => {
                Some(pow_rational(&base.exact_m(k)?, *p as usize))
            }
            _ => None,
        }
    }

    /// Exact `m_k` for families with rational values.
    pub fn exact_ratio(&self, k: u64) -> Option<BigRational> {
        match &self.family {
            Family::Analytic => Some(BigRational::one()),
            Family::Gevrey(s) if s.fract() == 0.0 && *s <= 16.0 => {
                let r = BigRational::from_integer(BigInt::from(k + 1));
                Some(pow_rational(&r, *s as usize))
            }
            _ => Some(self.exact_m(k + 1)? / self.exact_m(k)?),
        }
    }

    /// First `k < horizon` at which `m_k < m_{k-1}` (beyond float slack), if any.
    pub fn first_log_convexity_violation(&self, horizon: u64) -> Result<Option<u64>> {
        let mut prev = self.log_ratio(0)?;
        for k in 1..=horizon {
            let cur = self.log_ratio(k)?;
            if cur < prev - RATIO_SLACK * prev.abs().max(1.0) {
                return Ok(Some(k));
            }
            prev = cur;
        }
        Ok(None)
    }

    /// Checks that `m_k` is nondecreasing for `k ≤ horizon`.
    pub fn validate(&self, horizon: u64) -> Result<()> {
        match self.first_log_convexity_violation(horizon)? {
            Some(k) => Err(Error::NotLogConvex { k }),
            None => Ok(()),
        }
    }

    /// `M_k` as `f64` when representable.
    pub fn value_f64(&self, k: u64) -> Result<f64> {
        Ok(self.log_m(k)?.exp())
    }

    /// Same as [`Self::exact_m`], converted to `f64` when available.
    pub fn exact_m_f64(&self, k: u64) -> Option<f64> {
        self.exact_m(k).and_then(|q| q.to_f64())
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}
