//! The Ostrowski function `φ_M(r) = sup_{n≥0} r^{n+2}/M_n`.

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{pow_rational, LogMagnitude};
use crate::weights::WeightSequence;

/// Largest `n` examined when locating the maximizer.
pub const DEFAULT_SCAN_HORIZON: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiValue {
    /// `φ(r)`, or the best term found when `saturated`.
    pub value: LogMagnitude,
    /// Smallest `n` attaining the sup (last scanned `n` when `saturated`).
    pub argmax_n: u64,
    /// The sup is not attained below the scan horizon (`φ(r)` may be infinite).
    pub saturated: bool,
}

fn log_term(m: &WeightSequence, log_r: f64, n: u64) -> Result<f64> {
    Ok((n + 2) as f64 * log_r - m.log_m(n)?)
}

fn scan_limit(m: &WeightSequence, horizon: u64) -> u64 {
    match m.horizon() {
        Some(h) => horizon.min(h.saturating_sub(1)),
        None => horizon,
    }
}

/// `φ_M(e^{log_r})` with the scan bounded by `horizon`.
///
/// For a validated (log-convex) sequence the terms increase while `m_n < r`
/// and weakly decrease afterwards, so the smallest maximizer is the first
/// `n` with `m_n ≥ r`; it is located by exponential then binary search.
/// Unvalidated sequences fall back to a full scan.
pub fn phi_log(m: &WeightSequence, log_r: f64, horizon: u64) -> Result<PhiValue> {
    if !log_r.is_finite() {
        return Err(Error::domain("phi needs a finite positive r"));
    }
    let limit = scan_limit(m, horizon);
    if !m.is_validated() {
        return phi_brute_force(m, log_r, limit);
    }
    let reached = |n: u64| -> Result<bool> { Ok(m.log_ratio(n)? >= log_r) };
    if !reached(limit)? {
        return Ok(PhiValue {
            value: LogMagnitude::from_log(log_term(m, log_r, limit)?),
            argmax_n: limit,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (0u64, 1u64.min(limit));
    if reached(0)? {
        hi = 0;
    } else {
        // invariant: !reached(lo) && reached(hi)
        while !reached(hi)? {
            lo = hi;
            hi = (hi * 2).min(limit);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if reached(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(PhiValue {
        value: LogMagnitude::from_log(log_term(m, log_r, hi)?),
        argmax_n: hi,
        saturated: false,
    })
}

fn phi_brute_force(m: &WeightSequence, log_r: f64, limit: u64) -> Result<PhiValue> {
    let mut best = (log_term(m, log_r, 0)?, 0);
    for n in 1..=limit {
        let t = log_term(m, log_r, n)?;
        if t > best.0 {
            best = (t, n);
        }
    }
    Ok(PhiValue {
        value: LogMagnitude::from_log(best.0),
        argmax_n: best.1,
        saturated: best.1 == limit,
    })
}

/// `φ_M(r)` for `r > 0`.
pub fn phi(m: &WeightSequence, r: f64) -> Result<PhiValue> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("phi needs r > 0, got {r}")));
    }
    phi_log(m, r.ln(), DEFAULT_SCAN_HORIZON)
}

/// Exact `φ_M(r)` and its smallest maximizer, for validated sequences with exact backing.
pub fn phi_exact(m: &WeightSequence, r: &BigRational, horizon: u64) -> Result<(BigRational, u64)> {
    if !r.is_positive() {
        return Err(Error::domain("phi needs r > 0"));
    }
    if !m.is_validated() {
        return Err(Error::Precondition("exact phi needs a log-convex sequence".into()));
    }
    let unavailable = || Error::ExactUnavailable(format!("{} has no exact backing", m.spec()));
    let limit = scan_limit(m, horizon);
    for n in 0..=limit {
        if &m.exact_ratio(n).ok_or_else(unavailable)? >= r {
            let value = pow_rational(r, n as usize + 2) / m.exact_m(n).ok_or_else(unavailable)?;
            return Ok((value, n));
        }
    }
    Err(Error::Saturated(limit))
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiIdentity {
    pub k: u64,
    /// `ln(m_k^{k+2}/φ(m_k))`.
    pub log_lhs: f64,
    /// `ln M_k`.
    pub log_rhs: f64,
    pub delta_log: f64,
    pub argmax_n: u64,
    /// Outcome of the exact-rational comparison, when the family has exact backing.
    pub exact_equal: Option<bool>,
}

/// Checks `m_k^{k+2}/φ(m_k) = M_k`.
pub fn verify_phi_identity(m: &WeightSequence, k: u64) -> Result<PhiIdentity> {
    let log_r = m.log_ratio(k)?;
    let p = phi_log(m, log_r, DEFAULT_SCAN_HORIZON)?;
    if p.saturated {
        return Err(Error::Saturated(p.argmax_n));
    }
    let log_lhs = (k + 2) as f64 * log_r - p.value.ln_abs();
    let log_rhs = m.log_m(k)?;
    let exact_equal = match (m.exact_ratio(k), m.exact_m(k)) {
        (Some(r), Some(mk)) if m.is_validated() => {
            let (phi, _) = phi_exact(m, &r, k + 1)?;
            Some(pow_rational(&r, k as usize + 2) / phi == mk)
        }
        _ => None,
    };
    Ok(PhiIdentity {
        k,
        log_lhs,
        log_rhs,
        delta_log: log_lhs - log_rhs,
        argmax_n: p.argmax_n,
        exact_equal,
    })
}

/// One row of the `ostrowski` CSV.
#[derive(Debug, Clone, Serialize)]
pub struct PhiRow {
    pub r: f64,
    pub phi_log: f64,
    pub argmax: u64,
    pub saturated: bool,
}

/// `φ` on `count` log-spaced points of `[r_min, r_max]`.
pub fn phi_grid(m: &WeightSequence, r_min: f64, r_max: f64, count: usize) -> Result<Vec<PhiRow>> {
    if !(r_min > 0.0 && r_max >= r_min && count >= 1) {
        return Err(Error::usage("need 0 < r_min <= r_max and count >= 1"));
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..count)
        .map(|i| {
            let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            let log_r = a + (b - a) * t;
            let p = phi_log(m, log_r, DEFAULT_SCAN_HORIZON)?;
            Ok(PhiRow {
                r: log_r.exp(),
                phi_log: p.value.ln_abs(),
                argmax: p.argmax_n,
                saturated: p.saturated,
            })
        })
        .collect()
}
