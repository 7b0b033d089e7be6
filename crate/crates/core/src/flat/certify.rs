//! Exact axis derivatives of `F_Γ` at the points `x_λ`, the lower-bound
//! certificate and the sharpness table.
//!
//! Every stored block is centered on the `x₁`-axis, so `∂^n_{x₂} F_Γ(x_λ)` is a
//! finite sum of closed-form block axis derivatives. Two tails are carried:
//! the truncated `k`-series inside each block, and the blocks with index above
//! `lambda_max` that a longer construction would add. Since `φ(r) ≥ r²/M₀`
//! those have `c''ρ''² ≤ M₀ ρ''⁴ 2^{-λ''} ≤ M₀ ρ_{L+1}⁴ 2^{-λ''}`, and their centers
//! lie within `E_last/2` of the origin, so by the block upper bound they
//! contribute at most `64·8^{n+1} n! M_n M₀ ρ_{L+1}⁴ 2^{-L}/d^{n+2}` with
//! `d = E(ρ_λ) − E_last/2`. At the last stored index this gap is only
//! `E_last/2`, which is why the sharpness table leaves it out by default.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{DeltaReport, GammaData};
use crate::blocks::{default_terms, BaseFunction};
use crate::error::{Error, Result};
use crate::numerics::{factorial, ln_rational, pow_rational};
use crate::weights::{compare, Verdict, WeightSequence};

/// Horizon of the class comparison that gates the sharpness table.
const SHARPNESS_COMPARE_HORIZON: u64 = 1024;

fn ln_abs(q: &BigRational) -> f64 {
    if q.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_rational(&q.abs())
    }
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `∂^n_{x₂} F_Γ(x_λ)` split into the per-block partial sums and rigorous tails.
#[derive(Debug, Clone, Serialize)]
pub struct FAxisDerivative {
    /// Index of the evaluation point `x_λ`.
    pub at_lambda: u64,
    pub order: usize,
    /// Retained `k`-terms per block.
    pub terms: usize,
    /// `ln |Σ partial terms|`.
    pub value_log: f64,
    pub sign: i8,
    /// `ln` of the sum of the per-block `k`-series tails.
    pub series_tail_log: f64,
    /// `ln` of the bound on blocks beyond `lambda_max`.
    pub dropped_tail_log: f64,
    /// `(λ', ln |term|)` per stored block.
    pub term_logs: Vec<(u64, f64)>,
    #[serde(skip)]
    pub value: BigRational,
    #[serde(skip)]
    pub own_term: BigRational,
    #[serde(skip)]
    pub own_tail: BigRational,
    #[serde(skip)]
    pub cross: BigRational,
    #[serde(skip)]
    pub cross_tail: BigRational,
    #[serde(skip)]
    pub dropped_tail: BigRational,
}

impl FAxisDerivative {
    pub fn total_tail(&self) -> BigRational {
        &self.own_tail + &self.cross_tail + &self.dropped_tail
    }

    /// `|S| − T`, a certified lower bound on `|∂^n_{x₂} F_Γ(x_λ)|` (may be negative).
    pub fn lower(&self) -> BigRational {
        self.value.abs() - self.total_tail()
    }

    /// `|S| + T`.
    pub fn upper(&self) -> BigRational {
        self.value.abs() + self.total_tail()
    }
}

/// Exact `∂^{order}_{x₂} F_Γ` at `x_λ = (E(ρ_λ), 0)`, with `K = max(60, 4·order)` terms per block.
pub fn f_axis_x2_derivative_exact(g: &GammaData, at_lambda: u64, order: usize) -> Result<FAxisDerivative> {
    if order % 2 == 1 {
        return Err(Error::usage(format!(
            "axis derivatives of F are certified for even orders only, got {order}"
        )));
    }
    let at = g.entry(at_lambda)?;
    let terms = default_terms(order);
    let base = BaseFunction::new(&g.seq, terms)?;
    let mut value = BigRational::zero();
    let mut own_term = BigRational::zero();
    let mut own_tail = BigRational::zero();
    let mut cross = BigRational::zero();
    let mut cross_tail = BigRational::zero();
    let mut term_logs = Vec::new();
    for e in &g.entries {
        // f_{q,ρ}(x₁, ·) at x₁ = E_λ is h at y₁ = E_λ/ρ − q = (E_λ − E_λ')/ρ
        let y1 = (&at.e - &e.e) / &e.rho;
        let d = base.axis_x2_derivative_exact(order, &y1)?;
        let scale = &e.coeff * pow_rational(&(BigRational::one() / &e.rho), order);
        let v = d.exact_value.expect("exact base") * &scale;
        let t = d.exact_tail.expect("exact base") * &scale;
        term_logs.push((e.lambda, ln_abs(&v)));
        value += &v;
        if e.lambda == at_lambda {
            own_term = v;
            own_tail = t;
        } else {
            cross += v;
            cross_tail += t;
        }
    }
    let last_e = &g.entries.last().expect("nonempty").e;
    let d = &at.e - last_e / int(2);
    let unavailable = || Error::ExactUnavailable(g.seq.spec().into());
    let m = g.seq.exact_m(order as u64).ok_or_else(unavailable)?;
    let m0 = g.seq.exact_m(0).ok_or_else(unavailable)?;
    let rho_next = BigRational::one() / g.seq.exact_ratio(g.lambda_max + 1).ok_or_else(unavailable)?;
    let dropped_tail = int(64) * pow_rational(&int(8), order + 1) * BigRational::from_integer(factorial(order)) * m * m0
        * pow_rational(&rho_next, 4)
        / (BigRational::from_integer(BigInt::one() << g.lambda_max as usize) * pow_rational(&d, order + 2));
    Ok(FAxisDerivative {
        at_lambda,
        order,
        terms,
        value_log: ln_abs(&value),
        sign: if value.is_negative() { -1 } else { 1 },
        series_tail_log: ln_abs(&(&own_tail + &cross_tail)),
        dropped_tail_log: ln_abs(&dropped_tail),
        term_logs,
        value,
        own_term,
        own_tail,
        cross,
        cross_tail,
        dropped_tail,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerCertificateRow {
    pub lambda: u64,
    /// `ln |∂^λ_{x₂} F_Γ(x_λ)|` (partial sum).
    pub value_log: f64,
    pub tail_log: f64,
    /// `ln(|S| − T)`; `−∞` when the tails swallow the sum.
    pub lhs_log: f64,
    /// `ln(ε^λ λ! M_λ²/4^λ)`.
    pub rhs_log: f64,
    pub pass: bool,
    /// `ln` of the `λ`-th term alone.
    pub dominant_log: f64,
    /// `ln(λ! ρ_λ² M_λ²/4^λ)`.
    pub dominant_floor_log: f64,
    /// The `λ`-th term minus its tail is at least `λ! ρ_λ² M_λ²/4^λ`.
    pub dominant_ok: bool,
    /// Whether the `λ`-th term reaches `λ! ρ_λ² M_λ²/2^λ` (reported only).
    pub dominant_half_power_ok: bool,
    /// `ln(|X| + cross tails + dropped tail)` for the off-`λ` part.
    pub cross_log: f64,
    /// `ln(λ! M_λ 8^{λ+3}/δ_λ^λ)`.
    pub cross_bound_log: f64,
    pub cross_ok: bool,
    /// `D − t_D − CB ≤ |S| − T` and `|S| + T ≤ D + t_D + CB`.
    pub bracket_ok: bool,
    /// `λ < λ₀`: the gap hypothesis of the general argument is not met, the
    /// inequality is checked directly.
    pub below_lambda0: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerCertificate {
    pub family: String,
    /// `ε` is the minimum over the stored range of `Λ` only.
    pub epsilon: f64,
    pub lambda0_estimate: Option<u64>,
    pub rows: Vec<LowerCertificateRow>,
    /// `lhs − rhs` nondecreasing in `λ` (reported only).
    pub margin_nondecreasing: bool,
    pub pass: bool,
}

/// Certifies `|∂^λ_{x₂} F_Γ(x_λ)| ≥ ε^λ λ! M_λ²/4^λ` and the dominant/cross bracket
/// for each requested `λ ∈ Λ`, in exact arithmetic.
pub fn lower_bound_certificate(g: &GammaData, gaps: &DeltaReport, lambdas: &[u64]) -> Result<LowerCertificate> {
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let entry = g.entry(lambda)?;
        let n = lambda as usize;
        let d = f_axis_x2_derivative_exact(g, lambda, n)?;
        let m = g.seq.exact_m(lambda).ok_or_else(|| Error::ExactUnavailable(g.seq.spec().into()))?;
        let fact = BigRational::from_integer(factorial(n));
        let four_pow = BigRational::from_integer(BigInt::one() << (2 * n));
        let two_pow = BigRational::from_integer(BigInt::one() << n);
        let m2 = &m * &m;

        let lower = d.lower();
        let tail = d.total_tail();
        let rhs = pow_rational(&g.epsilon, n) * &fact * &m2 / &four_pow;
        let dominant = d.own_term.abs();
        let rho2 = &entry.rho * &entry.rho;
        let floor = &fact * &rho2 * &m2 / &four_pow;
        let half_power = &fact * &rho2 * &m2 / &two_pow;
        let cross_total = d.cross.abs() + &d.cross_tail + &d.dropped_tail;
        let cross_bound = &fact * &m * pow_rational(&int(8), n + 3) / pow_rational(&entry.delta, n);
        let bracket_ok = &dominant - &d.own_tail - &cross_bound <= lower
            && d.upper() <= &dominant + &d.own_tail + &cross_bound;
        let below_lambda0 = gaps.lambda0_estimate.is_none_or(|l0| lambda < l0);
        rows.push(LowerCertificateRow {
            lambda,
            value_log: d.value_log,
            tail_log: ln_abs(&tail),
            lhs_log: if lower.is_positive() { ln_rational(&lower) } else { f64::NEG_INFINITY },
            rhs_log: ln_rational(&rhs),
            pass: lower >= rhs,
            dominant_log: ln_abs(&dominant),
            dominant_floor_log: ln_rational(&floor),
            dominant_ok: &dominant - &d.own_tail >= floor,
            dominant_half_power_ok: &dominant - &d.own_tail >= half_power,
            cross_log: ln_abs(&cross_total),
            cross_bound_log: ln_rational(&cross_bound),
            cross_ok: cross_total <= cross_bound,
            bracket_ok,
            below_lambda0,
        });
    }
    let margins: Vec<f64> = rows.iter().map(|r| r.lhs_log - r.rhs_log).collect();
    let pass = !rows.is_empty() && rows.iter().all(|r| r.pass && r.dominant_ok && r.cross_ok && r.bracket_ok);
    Ok(LowerCertificate {
        family: g.seq.spec().to_string(),
        epsilon: num_traits::ToPrimitive::to_f64(&g.epsilon).unwrap_or(f64::NAN),
        lambda0_estimate: gaps.lambda0_estimate,
        margin_nondecreasing: margins.windows(2).all(|w| w[1] >= w[0]),
        rows,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SharpnessMode {
    /// `N` strictly below the `M_{2k}` scale: `r_λ` must grow.
    Strict,
    /// `N = M_{2k}`: `r_λ` must stay below `8^{(λ+3)/λ}`.
    Consistency,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessRow {
    pub lambda: u64,
    /// `ln` of the certified lower bound `|S| − T` on `|∂^λ_{x₂} F_Γ(x_λ)|`.
    pub lhs_log: f64,
    /// `ln(λ! N_λ)`.
    pub rhs_log: f64,
    /// `r_λ = exp((lhs − rhs)/λ)`.
    pub ratio_root: f64,
    /// `(|∂^λ_{x₂} F_Γ(x_λ)|/(λ! M_{2λ}))^{1/λ}`, the per-order constant against `M_{2k}`.
    pub k_const: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    pub family: String,
    pub n_family: String,
    pub mode: SharpnessMode,
    pub comparison: Option<Verdict>,
    pub rows: Vec<SharpnessRow>,
    pub strictly_increasing: bool,
    /// Largest `r_λ` over the table.
    pub fitted_constant: f64,
    /// Every `r_λ` (from the upper value `|S| + T`) is at most `8^{(λ+3)/λ}`.
    pub within_upper_bound: bool,
    pub pass: bool,
}

/// The table `r_λ = (|∂^λ_{x₂}F_Γ(x_λ)|/(λ! N_λ))^{1/λ}` over the stored `Λ`.
///
/// The default range is every stored index but the last. Refuses unless `N`
/// is `M_{2k}` itself or compares as strictly contained in it.
pub fn sharpness_certificate(g: &GammaData, n_seq: &WeightSequence, lambdas: Option<&[u64]>) -> Result<SharpnessReport> {
    let doubled = g.seq.shift(2)?;
    let (mode, comparison) = if n_seq.spec() == doubled.spec() {
        (SharpnessMode::Consistency, None)
    } else {
        let c = compare(n_seq, &doubled, SHARPNESS_COMPARE_HORIZON)?;
        if c.verdict != Verdict::StrictlyContainedDiagnostic {
            return Err(Error::Precondition(format!(
                "{} must compare as strictly contained in {} (got {:?} at K = {}); \
                 the table is only meaningful below the doubled scale",
                n_seq.spec(),
                doubled.spec(),
                c.verdict,
                SHARPNESS_COMPARE_HORIZON
            )));
        }
        (SharpnessMode::Strict, Some(c.verdict))
    };
    let all = g.lambdas();
    let lambdas = lambdas.unwrap_or(&all[..all.len() - 1]);
    let mut rows = Vec::new();
    let mut within = true;
    for &lambda in lambdas {
        let d = f_axis_x2_derivative_exact(g, lambda, lambda as usize)?;
        let lower = d.lower();
        let lhs_log = if lower.is_positive() { ln_rational(&lower) } else { f64::NEG_INFINITY };
        let ln_fact = statrs::function::factorial::ln_factorial(lambda);
        let rhs_log = ln_fact + n_seq.log_m(lambda)?;
        let l = lambda as f64;
        let upper_root = (ln_rational(&d.upper()) - ln_fact - doubled.log_m(lambda)?) / l;
        if mode == SharpnessMode::Consistency {
            within &= upper_root <= (l + 3.0) / l * 8f64.ln();
        }
        rows.push(SharpnessRow {
            lambda,
            lhs_log,
            rhs_log,
            ratio_root: ((lhs_log - rhs_log) / l).exp(),
            k_const: ((lhs_log - ln_fact - doubled.log_m(lambda)?) / l).exp(),
        });
    }
    let strictly_increasing = rows.windows(2).all(|w| w[1].ratio_root > w[0].ratio_root);
    let fitted_constant = rows.iter().map(|r| r.ratio_root).fold(0.0, f64::max);
    let pass = !rows.is_empty()
        && match mode {
            SharpnessMode::Strict => rows.len() >= 2 && strictly_increasing,
            SharpnessMode::Consistency => within,
        };
    Ok(SharpnessReport {
        family: g.seq.spec().to_string(),
        n_family: n_seq.spec().to_string(),
        mode,
        comparison,
        rows,
        strictly_increasing,
        fitted_constant,
        within_upper_bound: within,
        pass,
    })
}
