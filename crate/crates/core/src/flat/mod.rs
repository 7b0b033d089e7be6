//! The flat function `F_Γ(x) = Σ_{λ∈Λ} f_{q_λ,ρ_λ}(x)/(φ(ρ_λ^{-1}) 2^λ)` with
//! `ρ_n = M_n/M_{n+1}`, `q_n = E(ρ_n)/ρ_n`, its data `Γ`, and certificates.
//!
//! All of `Γ` is exact: `E` is evaluated as a 256-bit dyadic lower
//! approximation, so `q_λ`, the centers `x_λ = (E(ρ_λ), 0)` and the gaps `δ_λ`
//! are rationals.

mod certify;
mod sweeps;

pub use certify::{
    f_axis_x2_derivative_exact, lower_bound_certificate, sharpness_certificate, FAxisDerivative, LowerCertificate,
    LowerCertificateRow, SharpnessMode, SharpnessReport, SharpnessRow,
};
pub use sweeps::{f_eval, f_jet, g_jet, polar_upper_bound_sweep, upper_bound_sweep, DEFAULT_FLAT_POLAR_CONSTANT};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_rational, pow_rational, rational_to_string, root_floor};
use crate::ostrowski::{phi_exact, DEFAULT_SCAN_HORIZON};
use crate::weights::WeightSequence;

/// Default largest candidate index.
pub const DEFAULT_LAMBDA_MAX: u64 = 400;
/// Fractional bits of the dyadic approximations of `E` and `ε`.
pub const EXACT_BITS: u32 = 256;

/// The profile `E` with `E(0) = 0` and `E(r)/r → ∞` as `r → 0⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EFunction {
    Sqrt,
    /// `E(r) = r^{num/den}` with `0 < num < den`.
    Power { num: u32, den: u32 },
}

impl EFunction {
    /// Largest `a/2^256` not above `E(r)`, for `0 < r < 1`.
    pub fn eval_exact(&self, r: &BigRational) -> BigRational {
        match *self {
            EFunction::Sqrt => root_floor(r, 2, EXACT_BITS),
            EFunction::Power { num, den } => root_floor(&pow_rational(r, num as usize), den, EXACT_BITS),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            EFunction::Sqrt => r.sqrt(),
            EFunction::Power { num, den } => r.powf(num as f64 / den as f64),
        }
    }

    /// `ln E(e^{log_r})`.
    pub fn eval_log(&self, log_r: f64) -> f64 {
        match *self {
            EFunction::Sqrt => 0.5 * log_r,
            EFunction::Power { num, den } => log_r * num as f64 / den as f64,
        }
    }
}

impl fmt::Display for EFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EFunction::Sqrt => write!(f, "sqrt"),
            EFunction::Power { num, den } => write!(f, "power:{num}/{den}"),
        }
    }
}

impl FromStr for EFunction {
    type Err = Error;

    /// `sqrt`, `power:p/q` or `power:0.xyz` (at most three decimals).
    fn from_str(s: &str) -> Result<Self> {
        if s == "sqrt" {
            return Ok(EFunction::Sqrt);
        }
        let bad = || Error::usage(format!("unknown E spec '{s}' (expected sqrt, power:p/q or power:0.xyz)"));
        let rest = s.strip_prefix("power:").ok_or_else(bad)?;
        let (num, den) = if let Some((p, q)) = rest.split_once('/') {
            (p.parse::<u32>().map_err(|_| bad())?, q.parse::<u32>().map_err(|_| bad())?)
        } else {
            let frac = rest.strip_prefix("0.").ok_or_else(bad)?;
            if frac.is_empty() || frac.len() > 3 {
                return Err(bad());
            }
            (frac.parse::<u32>().map_err(|_| bad())?, 10u32.pow(frac.len() as u32))
        };
        if !(num > 0 && num < den) {
            return Err(Error::usage(format!("E = r^a needs 0 < a < 1, got {num}/{den}")));
        }
        let g = num_integer::gcd(num, den);
        Ok(EFunction::Power { num: num / g, den: den / g })
    }
}

/// One accepted index of `Λ`.
#[derive(Debug, Clone)]
pub struct GammaEntry {
    pub lambda: u64,
    /// `ρ_λ = M_λ/M_{λ+1}`.
    pub rho: BigRational,
    /// `E(ρ_λ)`, also the first coordinate of `x_λ`.
    pub e: BigRational,
    /// `q_λ = E(ρ_λ)/ρ_λ`.
    pub q: BigRational,
    /// `1/(φ(ρ_λ^{-1}) 2^λ)`.
    pub coeff: BigRational,
    /// `δ_λ`, distance from `E(ρ_λ)` to the other stored values.
    pub delta: BigRational,
}

/// The data `Γ = (Λ, ρ, q)` with derived constants.
#[derive(Debug, Clone)]
pub struct GammaData {
    pub seq: WeightSequence,
    pub e_fn: EFunction,
    pub lambda_max: u64,
    pub entries: Vec<GammaEntry>,
    /// Largest dyadic `ε` with `ε^λ ≤ ρ_λ²` for every stored `λ`.
    pub epsilon: BigRational,
    /// `B = 8⁵/ε`.
    pub b_const: BigRational,
}

fn exact_unavailable(seq: &WeightSequence) -> Error {
    Error::ExactUnavailable(format!("{} has no exact values; the flat construction needs them", seq.spec()))
}

/// Greedy choice of `Λ` among even candidates: accept `λ` when `q_λ > 1` and
/// `E(ρ_λ) < E(ρ_last)/2`.
pub fn build_gamma(
    seq: &WeightSequence,
    e_fn: EFunction,
    lambda_max: u64,
    candidates: Option<&[u64]>,
) -> Result<GammaData> {
    if !seq.is_validated() {
        return Err(Error::Construction(format!("{} is not log-convex", seq.spec())));
    }
    let default_candidates: Vec<u64> = (1..=lambda_max / 2).map(|i| 2 * i).collect();
    let candidates = candidates.unwrap_or(&default_candidates);
    if let Some(odd) = candidates.iter().find(|&&c| c % 2 == 1 || c == 0) {
        return Err(Error::usage(format!("candidate indices must be positive even integers, got {odd}")));
    }
    let rho = |n: u64| -> Result<BigRational> {
        seq.exact_ratio(n)
            .map(|m| BigRational::one() / m)
            .ok_or_else(|| exact_unavailable(seq))
    };
    let rho_first = rho(0)?;
    let rho_last = rho(lambda_max.max(1))?;
    if rho_last >= rho_first || rho_last >= BigRational::one() {
        return Err(Error::Construction(format!(
            "rho_n = M_n/M_(n+1) does not decrease below 1 up to n = {lambda_max} for {}; \
             the class must properly contain the analytic functions",
            seq.spec()
        )));
    }

    let mut entries: Vec<GammaEntry> = Vec::new();
    for &lambda in candidates.iter().filter(|&&c| c <= lambda_max) {
        let r = rho(lambda)?;
        let e = e_fn.eval_exact(&r);
        let q = &e / &r;
        if q <= BigRational::one() {
            continue;
        }
        if let Some(last) = entries.last() {
            if &e + &e >= last.e {
                continue;
            }
        }
        let m = BigRational::one() / &r;
        let (phi, _) = phi_exact(seq, &m, DEFAULT_SCAN_HORIZON)?;
        let coeff = BigRational::one() / (phi * BigRational::from_integer(BigInt::one() << lambda as usize));
        entries.push(GammaEntry {
            lambda,
            rho: r,
            e,
            q,
            coeff,
            delta: BigRational::zero(),
        });
    }
    if entries.len() < 2 {
        return Err(Error::Construction(format!(
            "only {} index accepted up to {lambda_max}; need at least 2",
            entries.len()
        )));
    }
    let es: Vec<BigRational> = entries.iter().map(|e| e.e.clone()).collect();
    for (i, entry) in entries.iter_mut().enumerate() {
        let mut best: Option<BigRational> = None;
        for (j, other) in es.iter().enumerate() {
            if i != j {
                let d = (&es[i] - other).abs();
                if best.as_ref().is_none_or(|b| &d < b) {
                    best = Some(d);
                }
            }
        }
        entry.delta = best.expect("at least two entries");
    }
    let epsilon = entries
        .iter()
        .map(|e| root_floor(&(&e.rho * &e.rho), e.lambda as u32, EXACT_BITS))
        .min()
        .expect("nonempty");
    if epsilon.is_zero() {
        return Err(Error::Construction("epsilon underflowed the dyadic precision".into()));
    }
    let b_const = BigRational::from_integer(BigInt::from(8).pow(5)) / &epsilon;
    Ok(GammaData {
        seq: seq.clone(),
        e_fn,
        lambda_max,
        entries,
        epsilon,
        b_const,
    })
}

impl GammaData {
    pub fn lambdas(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn entry(&self, lambda: u64) -> Result<&GammaEntry> {
        self.entries
            .iter()
            .find(|e| e.lambda == lambda)
            .ok_or_else(|| Error::usage(format!("{lambda} is not in Lambda = {:?}", self.lambdas())))
    }

    /// `E(ρ_λ) > 2E(ρ_λ')` for every stored `λ < λ'`.
    pub fn sparsity_holds(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, a)| {
            self.entries[i + 1..]
                .iter()
                .all(|b| a.lambda < b.lambda && a.e > &b.e + &b.e)
        })
    }

    pub fn q_exceeds_one(&self) -> bool {
        self.entries.iter().all(|e| e.q > BigRational::one())
    }

    pub fn summary(&self) -> GammaSummary {
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        GammaSummary {
            family: self.seq.spec().to_string(),
            e: self.e_fn.to_string(),
            lambda_max: self.lambda_max,
            lambda: self.lambdas(),
            rho: self.entries.iter().map(|e| rational_to_string(&e.rho)).collect(),
            e_values: self.entries.iter().map(|e| f(&e.e)).collect(),
            q: self.entries.iter().map(|e| f(&e.q)).collect(),
            delta: self.entries.iter().map(|e| f(&e.delta)).collect(),
            coeff_log: self.entries.iter().map(|e| ln_rational(&e.coeff)).collect(),
            epsilon: f(&self.epsilon),
            b_const: f(&self.b_const),
            sparsity: self.sparsity_holds(),
            q_exceeds_one: self.q_exceeds_one(),
        }
    }
}

/// JSON form of `Γ`. Reading it back rebuilds `Γ` from `family`, `e` and `lambda_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaSummary {
    pub family: String,
    pub e: String,
    pub lambda_max: u64,
    pub lambda: Vec<u64>,
    pub rho: Vec<String>,
    pub e_values: Vec<f64>,
    pub q: Vec<f64>,
    pub delta: Vec<f64>,
    /// `ln(1/(φ(ρ_λ^{-1}) 2^λ))`.
    pub coeff_log: Vec<f64>,
    pub epsilon: f64,
    pub b_const: f64,
    pub sparsity: bool,
    pub q_exceeds_one: bool,
}

impl GammaSummary {
    /// Rebuilds `Γ` and checks that the stored index set is reproduced.
    pub fn rebuild(&self) -> Result<GammaData> {
        let seq = WeightSequence::parse(&self.family)?;
        let e_fn: EFunction = self.e.parse()?;
        let g = build_gamma(&seq, e_fn, self.lambda_max, None)?;
        if g.lambdas() != self.lambda {
            return Err(Error::usage(format!(
                "stored Lambda {:?} does not match the rebuilt {:?}",
                self.lambda,
                g.lambdas()
            )));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub lambda: u64,
    pub delta: f64,
    pub half_e: f64,
    /// `δ_λ ≥ E(ρ_λ)/2`.
    pub at_least_half_e: bool,
    /// `δ_λ ≥ B M_λ^{-1/λ}`, decided exactly as `δ_λ^λ M_λ ≥ B^λ`.
    pub hypothesis: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub rows: Vec<DeltaRow>,
    /// Every stored `λ` has `δ_λ ≥ E(ρ_λ)/2`.
    pub half_e_holds: bool,
    /// Smallest stored `λ` from which the hypothesis holds for all larger stored `λ`.
    pub lambda0_stored: Option<u64>,
    /// Smallest even `n` past which `E(ρ_n)/2 ≥ B M_n^{-1/n}`, located by doubling and bisection.
    pub lambda0_estimate: Option<u64>,
}

/// The gaps `δ_λ` and the threshold `λ₀` of the lower-estimate hypothesis.
pub fn delta_gaps(g: &GammaData) -> Result<DeltaReport> {
    let mut rows = Vec::new();
    for e in &g.entries {
        let m = g.seq.exact_m(e.lambda).ok_or_else(|| exact_unavailable(&g.seq))?;
        let n = e.lambda as usize;
        let hypothesis = pow_rational(&e.delta, n) * m >= pow_rational(&g.b_const, n);
        rows.push(DeltaRow {
            lambda: e.lambda,
            delta: e.delta.to_f64().unwrap_or(f64::NAN),
            half_e: e.e.to_f64().unwrap_or(f64::NAN) / 2.0,
            at_least_half_e: &e.delta + &e.delta >= e.e,
            hypothesis,
        });
    }
    let lambda0_stored = rows
        .iter()
        .rposition(|r| !r.hypothesis)
        .map_or(rows.first().map(|r| r.lambda), |i| rows.get(i + 1).map(|r| r.lambda));
    Ok(DeltaReport {
        half_e_holds: rows.iter().all(|r| r.at_least_half_e),
        lambda0_stored,
        lambda0_estimate: lambda0_estimate(g, 1 << 62)?,
        rows,
    })
}

/// `ln(E(ρ_n)/2) − ln(B M_n^{-1/n})`, in floating point.
fn hypothesis_margin(g: &GammaData, ln_b: f64, n: u64) -> Result<f64> {
    let log_rho = -g.seq.log_ratio(n)?;
    Ok(g.e_fn.eval_log(log_rho) - std::f64::consts::LN_2 - ln_b + g.seq.log_m(n)? / n as f64)
}

fn lambda0_estimate(g: &GammaData, limit: u64) -> Result<Option<u64>> {
    let ln_b = ln_rational(&g.b_const);
    let mut hi = 2u64;
    while hypothesis_margin(g, ln_b, hi)? < 0.0 {
        if hi >= limit / 2 {
            return Ok(None);
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo < 2 {
        return Ok(Some(hi));
    }
    // invariant: margin(lo) < 0 ≤ margin(hi); both even
    while hi - lo > 2 {
        let mid = (lo + (hi - lo) / 2) & !1;
        if hypothesis_margin(g, ln_b, mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn gevrey_gamma() -> GammaData {
        build_gamma(&WeightSequence::gevrey(1.0).unwrap(), EFunction::Sqrt, DEFAULT_LAMBDA_MAX, None).unwrap()
    }

    #[test]
    fn greedy_trace_for_gevrey() {
        let g = gevrey_gamma();
        // ρ_n = 1/(n+1): accept when λ+1 > 4(λ_prev+1)
        assert_eq!(g.lambdas(), vec![2, 12, 52, 212]);
        assert!(g.sparsity_holds());
        assert!(g.q_exceeds_one());
        for w in g.entries.windows(2) {
            assert!(w[1].rho <= &w[0].rho / BigRational::from_integer(4.into()));
        }
        let small = build_gamma(&WeightSequence::gevrey(1.0).unwrap(), EFunction::Sqrt, 64, None).unwrap();
        assert_eq!(small.lambdas(), vec![2, 12, 52]);
    }

    #[test]
    fn e_is_a_tight_lower_approximation() {
        let g = gevrey_gamma();
        for e in &g.entries {
            assert!(&e.e * &e.e <= e.rho);
            let ulp = BigRational::new(BigInt::one(), BigInt::one() << EXACT_BITS as usize);
            let up = &e.e + ulp;
            assert!(&up * &up > e.rho);
        }
    }

    #[test]
    fn epsilon_and_b() {
        let g = gevrey_gamma();
        // min over λ of (ρ_λ²)^{1/λ} is at λ = 2: 1/3
        let third = BigRational::new(1.into(), 3.into());
        assert!(g.epsilon <= third);
        assert!(&third - &g.epsilon < BigRational::new(1.into(), BigInt::one() << 250));
        for e in &g.entries {
            assert!(pow_rational(&g.epsilon, e.lambda as usize) <= &e.rho * &e.rho);
        }
        assert!((g.b_const.to_f64().unwrap() - 3.0 * 32768.0).abs() < 1e-6);
    }

    #[test]
    fn analytic_is_rejected() {
        let r = build_gamma(&WeightSequence::analytic(), EFunction::Sqrt, 64, None);
        assert!(matches!(r, Err(Error::Construction(_))));
        assert!(build_gamma(&WeightSequence::gevrey(1.0).unwrap(), EFunction::Sqrt, 64, Some(&[2, 3])).is_err());
    }

    #[test]
    fn gaps() {
        let g = gevrey_gamma();
        let d = delta_gaps(&g).unwrap();
        assert!(d.half_e_holds);
        // the hypothesis needs λ of order 10^11 here
        assert!(d.rows.iter().all(|r| !r.hypothesis));
        assert_eq!(d.lambda0_stored, None);
        let l0 = d.lambda0_estimate.unwrap();
        assert!(l0 > 100_000_000_000 && l0 < 1_000_000_000_000, "{l0}");
        let two = build_gamma(&WeightSequence::gevrey(1.0).unwrap(), EFunction::Sqrt, 12, None).unwrap();
        assert_eq!(two.entries[0].delta, two.entries[1].delta);
    }

    #[test]
    fn e_specs() {
        assert_eq!("sqrt".parse::<EFunction>().unwrap(), EFunction::Sqrt);
        assert_eq!("power:2/4".parse::<EFunction>().unwrap(), EFunction::Power { num: 1, den: 2 });
        assert_eq!("power:0.25".parse::<EFunction>().unwrap(), EFunction::Power { num: 1, den: 4 });
        assert!("power:1/1".parse::<EFunction>().is_err());
        assert!("cube".parse::<EFunction>().is_err());
        let g = build_gamma(
            &WeightSequence::gevrey(1.0).unwrap(),
            EFunction::Power { num: 1, den: 4 },
            400,
            None,
        )
        .unwrap();
        assert!(g.sparsity_holds());
        // E(ρ) halves when ρ shrinks 16-fold
        assert_eq!(g.lambdas()[..2], [2, 48]);
    }

    #[test]
    fn summary_round_trip() {
        let g = gevrey_gamma();
        let s = g.summary();
        let json = serde_json::to_string(&s).unwrap();
        let back: GammaSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rebuild().unwrap().lambdas(), g.lambdas());
    }
}
