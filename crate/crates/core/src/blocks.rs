//! The base function `h(x) = Σ_k w_k/(1 + x₁² + (m_k x₂)²)` with
//! `w_k = m_k²/(2^k φ(m_k))`, the building block `f_{q,ρ}(x) = h(x/ρ − q)`,
//! its polar composite `g_{q,ρ} = f_{q,ρ}∘σ`, and their bound checks.
//!
//! The series is truncated after `K` terms (`k = 0..K`). Since `φ(r) ≥ r^{n+2}/M_n`
//! for every `n`, each weight obeys `w_k m_k^j ≤ 2^{-k} M_j`, so the dropped
//! terms of any quantity carrying a factor `m_k^j` sum to at most `M_j 2^{1−K}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bricks::{eight_pow, exact_scaled_le, multiindices, polar_coordinates, sample, DEFAULT_POLAR_CONSTANT};
use crate::error::{Error, Result};
use crate::numerics::{
    factorial, ln_rational, log_sum_exp, pow_rational, rational_from_f64, Jet2, JetScalar, LogMagnitude,
};
use crate::ostrowski::{phi_exact, phi_log, DEFAULT_SCAN_HORIZON};
use crate::report::{BoundReport, BoundSample};
use crate::sampling;
use crate::weights::WeightSequence;

/// Constant of the polar block estimate used by default.
pub const DEFAULT_BLOCK_POLAR_CONSTANT: f64 = 2.0 * DEFAULT_POLAR_CONSTANT;

/// Default number of retained series terms for derivatives up to `dmax`.
pub fn default_terms(dmax: usize) -> usize {
    60.max(4 * dmax)
}

/// `2^{1−K}` as an exact rational.
fn exact_tail_factor(terms: usize) -> BigRational {
    BigRational::new(BigInt::from(2), BigInt::one() << terms)
}

fn tail_factor_log(terms: usize) -> f64 {
    (1.0 - terms as f64) * std::f64::consts::LN_2
}

/// The truncated base function.
#[derive(Debug, Clone)]
pub struct BaseFunction {
    seq: WeightSequence,
    terms: usize,
    /// `(ln w_k, m_k)`; `ln w_k = −∞` for terms whose `φ` saturated.
    float_terms: Vec<(f64, f64)>,
    /// `(w_k, m_k)` when the sequence has exact backing.
    exact_terms: Option<Vec<(BigRational, BigRational)>>,
}

impl BaseFunction {
    pub fn new(seq: &WeightSequence, terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::usage("the base function needs at least one series term"));
        }
        let mut float_terms = Vec::with_capacity(terms);
        for k in 0..terms as u64 {
            let log_m = seq.log_ratio(k)?;
            let p = phi_log(seq, log_m, DEFAULT_SCAN_HORIZON)?;
            let log_w = if p.saturated {
                log::warn!("phi saturated at m_{k} for {}; term dropped", seq.spec());
                f64::NEG_INFINITY
            } else {
                2.0 * log_m - k as f64 * std::f64::consts::LN_2 - p.value.ln_abs()
            };
            float_terms.push((log_w, log_m.exp()));
        }
        let exact_terms = if seq.is_validated() && seq.exact_ratio(0).is_some() {
            Self::exact_weights(seq, terms)?
        } else {
            None
        };
        Ok(BaseFunction {
            seq: seq.clone(),
            terms,
            float_terms,
            exact_terms,
        })
    }

    fn exact_weights(seq: &WeightSequence, terms: usize) -> Result<Option<Vec<(BigRational, BigRational)>>> {
        let mut out = Vec::with_capacity(terms);
        for k in 0..terms {
            let Some(m) = seq.exact_ratio(k as u64) else {
                return Ok(None);
            };
            let w = match phi_exact(seq, &m, DEFAULT_SCAN_HORIZON) {
                Ok((phi, _)) => &m * &m / (phi * BigRational::from_integer(BigInt::one() << k)),
                Err(Error::Saturated(_)) => {
                    log::warn!("phi saturated at m_{k} for {}; term dropped", seq.spec());
                    BigRational::zero()
                }
                Err(Error::ExactUnavailable(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            out.push((w, m));
        }
        Ok(Some(out))
    }

    pub fn sequence(&self) -> &WeightSequence {
        &self.seq
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn is_exact(&self) -> bool {
        self.exact_terms.is_some()
    }

    /// Term weights `w_k` (floating point).
    pub fn weights(&self) -> Vec<f64> {
        self.float_terms.iter().map(|t| t.0.exp()).collect()
    }

    pub fn exact_weights_table(&self) -> Option<&[(BigRational, BigRational)]> {
        self.exact_terms.as_deref()
    }

    /// Bound on the dropped tail of the value series: `Σ_{k≥K} w_k ≤ 2^{1−K}`.
    pub fn tail_bound(&self) -> LogMagnitude {
        LogMagnitude::from_log(tail_factor_log(self.terms))
    }

    /// Partial sum of `h` at `x` and the tail bound.
    pub fn eval(&self, x: [f64; 2]) -> (f64, f64) {
        let r1 = 1.0 + x[0] * x[0];
        let value = self
            .float_terms
            .iter()
            .map(|&(lw, m)| lw.exp() / (r1 + (m * x[1]) * (m * x[1])))
            .sum();
        (value, self.tail_bound().to_f64())
    }

    /// Exact partial sum of `h` at a rational point and the exact tail bound.
    pub fn eval_exact(&self, x: &[BigRational; 2]) -> Result<(BigRational, BigRational)> {
        let terms = self.exact_or_err()?;
        let r1 = BigRational::one() + &x[0] * &x[0];
        let mut sum = BigRational::zero();
        for (w, m) in terms {
            let mx = m * &x[1];
            sum += w / (&r1 + &mx * &mx);
        }
        Ok((sum, exact_tail_factor(self.terms)))
    }

    fn exact_or_err(&self) -> Result<&[(BigRational, BigRational)]> {
        self.exact_terms
            .as_deref()
            .ok_or_else(|| Error::ExactUnavailable(format!("{} has no exact base-function weights", self.seq.spec())))
    }

    fn exact_m(&self, k: u64) -> Result<BigRational> {
        self.seq
            .exact_m(k)
            .ok_or_else(|| Error::ExactUnavailable(format!("{} has no exact M_{k}", self.seq.spec())))
    }

    /// `h(y₁, y₂)` composed with arbitrary jets.
    pub fn of_jets<S: BaseScalar>(&self, y1: &Jet2<S>, y2: &Jet2<S>) -> Result<Jet2<S>> {
        let terms = S::terms(self)?;
        let a = (y1 * y1).add_scalar(&S::one());
        let b = y2 * y2;
        let mut sum = Jet2::zero(y1.base().clone(), y1.degree());
        for (w, m2) in &terms {
            if w.is_zero() {
                continue;
            }
            let denom = a.try_add(&b.scale(m2))?;
            sum = sum.try_add(&denom.recip()?.scale(w))?;
        }
        Ok(sum)
    }

    /// Jet of the `K`-term partial sum of `h` at `x`.
    pub fn jet<S: BaseScalar>(&self, x: [S; 2], degree: usize) -> Result<Jet2<S>> {
        let (y1, y2) = Jet2::coordinates(x, degree);
        self.of_jets(&y1, &y2)
    }

    /// `∂^{2n}_{x₂} h(x₁, 0)` in closed form.
    ///
    /// On the axis each term is `w_k/(a + m_k² x₂²)` with `a = 1 + x₁²`, whose
    /// `x₂^{2n}` Taylor coefficient is `(−1)ⁿ w_k m_k^{2n}/a^{n+1}`.
    pub fn axis_x2_derivative_exact(&self, order: usize, x1: &BigRational) -> Result<AxisDerivative> {
        if order % 2 == 1 {
            return Ok(AxisDerivative::odd(order, self.terms));
        }
        let n = order / 2;
        let terms = self.exact_or_err()?;
        let a = BigRational::one() + x1 * x1;
        let a_pow = pow_rational(&a, n + 1);
        let mut s = BigRational::zero();
        for (w, m) in terms {
            s += w * pow_rational(m, order);
        }
        let fact = BigRational::from_integer(factorial(order));
        let mut value = &fact * s / &a_pow;
        if n % 2 == 1 {
            value = -value;
        }
        let tail = fact * self.exact_m(order as u64)? * exact_tail_factor(self.terms) / a_pow;
        Ok(AxisDerivative::exact(order, self.terms, value, tail))
    }

    /// Floating version of [`Self::axis_x2_derivative_exact`] for sequences without exact backing.
    pub fn axis_x2_derivative_log(&self, order: usize, x1: f64) -> Result<AxisDerivative> {
        if order % 2 == 1 {
            return Ok(AxisDerivative::odd(order, self.terms));
        }
        let n = order / 2;
        let ln_a = (1.0 + x1 * x1).ln();
        let logs: Vec<f64> = self
            .float_terms
            .iter()
            .map(|&(lw, m)| lw + order as f64 * m.ln())
            .collect();
        let ln_fact = statrs::function::factorial::ln_factorial(order as u64);
        let log_abs = ln_fact + logs.iter().fold(f64::NEG_INFINITY, |a, &b| log_sum_exp(a, b)) - (n + 1) as f64 * ln_a;
        let log_tail = ln_fact + self.seq.log_m(order as u64)? + tail_factor_log(self.terms) - (n + 1) as f64 * ln_a;
        let sign = if n % 2 == 1 { -1 } else { 1 };
        Ok(AxisDerivative {
            order,
            terms: self.terms,
            value: LogMagnitude::from_parts(sign, log_abs),
            tail_bound: LogMagnitude::from_log(log_tail),
            exact_value: None,
            exact_tail: None,
            odd_symmetry_zero: false,
        })
    }
}

/// Scalars the base function can be evaluated in.
pub trait BaseScalar: JetScalar {
    /// `(w_k, m_k²)` for the retained terms.
    fn terms(base: &BaseFunction) -> Result<Vec<(Self, Self)>>;
}

impl BaseScalar for f64 {
    fn terms(base: &BaseFunction) -> Result<Vec<(f64, f64)>> {
        Ok(base.float_terms.iter().map(|&(lw, m)| (lw.exp(), m * m)).collect())
    }
}

impl BaseScalar for BigRational {
    fn terms(base: &BaseFunction) -> Result<Vec<(BigRational, BigRational)>> {
        Ok(base.exact_or_err()?.iter().map(|(w, m)| (w.clone(), m * m)).collect())
    }
}

/// An axis derivative of a truncated series plus a bound on the dropped terms.
#[derive(Debug, Clone, Serialize)]
pub struct AxisDerivative {
    pub order: usize,
    pub terms: usize,
    pub value: LogMagnitude,
    pub tail_bound: LogMagnitude,
    #[serde(skip)]
    pub exact_value: Option<BigRational>,
    #[serde(skip)]
    pub exact_tail: Option<BigRational>,
    /// Odd orders vanish on the axis by the `x₂ ↦ −x₂` symmetry; no series is evaluated.
    pub odd_symmetry_zero: bool,
}

impl AxisDerivative {
    fn odd(order: usize, terms: usize) -> Self {
        AxisDerivative {
            order,
            terms,
            value: LogMagnitude::ZERO,
            tail_bound: LogMagnitude::ZERO,
            exact_value: Some(BigRational::zero()),
            exact_tail: Some(BigRational::zero()),
            odd_symmetry_zero: true,
        }
    }

    fn exact(order: usize, terms: usize, value: BigRational, tail: BigRational) -> Self {
        AxisDerivative {
            order,
            terms,
            value: rational_log(&value),
            tail_bound: rational_log(&tail),
            exact_value: Some(value),
            exact_tail: Some(tail),
            odd_symmetry_zero: false,
        }
    }

    /// Multiplies value and tail by a positive rational.
    pub fn scaled(&self, c: &BigRational) -> Self {
        let ln_c = ln_rational(c);
        AxisDerivative {
            order: self.order,
            terms: self.terms,
            value: LogMagnitude::from_parts(self.value.sign(), self.value.ln_abs() + ln_c),
            tail_bound: if self.tail_bound.is_zero() {
                LogMagnitude::ZERO
            } else {
                LogMagnitude::from_log(self.tail_bound.ln_abs() + ln_c)
            },
            exact_value: self.exact_value.as_ref().map(|v| v * c),
            exact_tail: self.exact_tail.as_ref().map(|t| t * c),
            odd_symmetry_zero: self.odd_symmetry_zero,
        }
    }
}

fn rational_log(q: &BigRational) -> LogMagnitude {
    if q.is_zero() {
        LogMagnitude::ZERO
    } else {
        LogMagnitude::from_parts(if q.is_negative() { -1 } else { 1 }, ln_rational(&q.abs()))
    }
}

/// One row of the base-function lower-bound check.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundRow {
    pub n: usize,
    /// `ln |∂^{2n}_{x₂} h_K(0,0)|`.
    pub value_log: f64,
    pub tail_log: f64,
    /// `ln((2n)! M_{2n}/4ⁿ)`.
    pub bound_log: f64,
    /// `(−1)ⁿ` sign observed.
    pub sign_ok: bool,
    pub pass: bool,
}

/// `|∂^{2n}_{x₂} h(0,0)| ≥ (2n)! M_{2n}/4ⁿ` for `n ≤ nmax`, with the truncated
/// partial sum reduced by its tail bound. Exact when the sequence allows it.
pub fn base_lower_check(base: &BaseFunction, nmax: usize) -> Result<Vec<LowerBoundRow>> {
    let mut rows = Vec::new();
    for n in 0..=nmax {
        let order = 2 * n;
        let expected_sign = if n % 2 == 1 { -1 } else { 1 };
        if base.is_exact() {
            let d = base.axis_x2_derivative_exact(order, &BigRational::zero())?;
            let value = d.exact_value.clone().expect("exact");
            let tail = d.exact_tail.clone().expect("exact");
            let bound = BigRational::from_integer(factorial(order)) * base.exact_m(order as u64)?
                / BigRational::from_integer(BigInt::one() << order);
            rows.push(LowerBoundRow {
                n,
                value_log: ln_rational(&value.abs()),
                tail_log: ln_rational(&tail),
                bound_log: ln_rational(&bound),
                sign_ok: d.value.sign() == expected_sign,
                pass: value.abs() - tail >= bound,
            });
        } else {
            let d = base.axis_x2_derivative_log(order, 0.0)?;
            let bound_log = statrs::function::factorial::ln_factorial(order as u64) + base.seq.log_m(order as u64)?
                - order as f64 * std::f64::consts::LN_2;
            let reduced = d.value.abs() - d.tail_bound;
            rows.push(LowerBoundRow {
                n,
                value_log: d.value.ln_abs(),
                tail_log: d.tail_bound.ln_abs(),
                bound_log,
                sign_ok: d.value.sign() == expected_sign,
                pass: reduced.sign() > 0 && reduced.ln_abs() >= bound_log,
            });
        }
    }
    Ok(rows)
}

/// Checks `|∂^α h(x)| ≤ 64·8^{|α|+1} α! M_{α₂}/(1+|x|²)^{1+|α|/2}` for `|α| ≤ dmax`
/// on the truncated series plus the derivative tail
/// `8^{|α|+1} α! M_{α₂} 2^{1−K}/(1+|x|²)^{1+|α|/2}`.
///
/// Exact (rational points, squared comparison) when the sequence allows it.
pub fn base_upper_check(base: &BaseFunction, points: &[[f64; 2]], dmax: usize) -> Result<BoundReport> {
    let parts: Vec<Vec<BoundSample>> = points
        .par_iter()
        .map(|&x| upper_point(base, x, [0.0, 0.0], 1.0, dmax))
        .collect::<Result<_>>()?;
    let mut report = BoundReport::merge("base", base.is_exact(), dmax, parts);
    report.constant = Some(64.0);
    Ok(report)
}

/// Shared upper check for `h` (`rho = 1`, `center = 0`) and for `f_{q,ρ}`,
/// whose bound is `64 ρ² 8^{|α|+1} α! M_{α₂}/(‖x−p‖² + ρ²)^{1+|α|/2}`.
fn upper_point(base: &BaseFunction, x: [f64; 2], center: [f64; 2], rho: f64, dmax: usize) -> Result<Vec<BoundSample>> {
    let block = BlockParams { q: center[0] / rho, rho };
    let params = if rho == 1.0 { vec![] } else { vec![block.q, rho] };
    let mut out = Vec::new();
    if base.is_exact() {
        let xr = [rational_from_f64(x[0]), rational_from_f64(x[1])];
        let pr = rational_from_f64(center[0]);
        let rr = rational_from_f64(rho);
        let jet = if rho == 1.0 && center[0] == 0.0 {
            base.jet(xr.clone(), dmax)?
        } else {
            block_jet(base, &block, xr.clone(), dmax)?
        };
        let d1 = &xr[0] - &pr;
        let s = &d1 * &d1 + &xr[1] * &xr[1] + &rr * &rr;
        let ln_s = ln_rational(&s);
        let factor = BigRational::from_integer(64.into()) - exact_tail_factor(base.terms);
        for alpha in multiindices(dmax) {
            let order = alpha.0 + alpha.1;
            let coef = jet.coeff(alpha.0, alpha.1);
            let k = &factor * &rr * &rr * eight_pow(order + 1) * base.exact_m(alpha.1 as u64)?;
            let pass = exact_scaled_le(&coef, &s, order, &k);
            let rhs_log = ln_rational(&k) - (1.0 + order as f64 / 2.0) * ln_s;
            out.push(sample(x, params.clone(), alpha, ln_rational(&coef.abs()), rhs_log, pass));
        }
    } else {
        let jet = block_jet(base, &block, x, dmax)?;
        let d1 = x[0] - center[0];
        let ln_s = (d1 * d1 + x[1] * x[1] + rho * rho).ln();
        let ln_tail_factor = tail_factor_log(base.terms);
        for alpha in multiindices(dmax) {
            let order = alpha.0 + alpha.1;
            let shape = 2.0 * rho.ln() + (order + 1) as f64 * 8f64.ln() + base.seq.log_m(alpha.1 as u64)?
                - (1.0 + order as f64 / 2.0) * ln_s;
            let lhs = LogMagnitude::from_f64(jet.coeff(alpha.0, alpha.1).abs()) + LogMagnitude::from_log(shape + ln_tail_factor);
            let rhs_log = shape + 64f64.ln();
            let lhs_log = lhs.ln_abs();
            out.push(sample(x, params.clone(), alpha, lhs_log, rhs_log, lhs_log <= rhs_log));
        }
    }
    Ok(out)
}

/// Parameters of the building block `f_{q,ρ}(x) = h(x/ρ − q)`, centered at `p = (ρq, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub q: f64,
    pub rho: f64,
}

impl BlockParams {
    pub fn new(q: f64, rho: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::domain(format!("block needs q >= 1, got {q}")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!("block needs 0 < rho < 1, got {rho}")));
        }
        Ok(BlockParams { q, rho })
    }

    pub fn center(&self) -> [f64; 2] {
        [self.rho * self.q, 0.0]
    }
}

/// `f_{q,ρ}` composed with arbitrary jets `x₁, x₂`.
pub fn block_of_jets<S: BaseScalar>(base: &BaseFunction, bp: &BlockParams, x1: &Jet2<S>, x2: &Jet2<S>) -> Result<Jet2<S>> {
    let inv = S::one() / S::from_f64(bp.rho);
    let y1 = x1.scale(&inv).add_scalar(&-S::from_f64(bp.q));
    let y2 = x2.scale(&inv);
    base.of_jets(&y1, &y2)
}

/// Jet of `f_{q,ρ}` at `x`.
pub fn block_jet<S: BaseScalar>(base: &BaseFunction, bp: &BlockParams, x: [S; 2], degree: usize) -> Result<Jet2<S>> {
    let (x1, x2) = Jet2::coordinates(x, degree);
    block_of_jets(base, bp, &x1, &x2)
}

/// Jet of `g_{q,ρ}(r, θ) = f_{q,ρ}(r cos θ, r sin θ)` in `(r, θ)`.
pub fn polar_block_jet(base: &BaseFunction, bp: &BlockParams, r: f64, theta: f64, degree: usize) -> Result<Jet2<f64>> {
    let (x1, x2) = polar_coordinates(r, theta, degree)?;
    block_of_jets(base, bp, &x1, &x2)
}

/// `∂^{order}_{x₂} f_{q,ρ}(x₁, 0) = ρ^{−order} ∂^{order}_{x₂} h(x₁/ρ − q, 0)`, exactly.
pub fn block_axis_derivative_at(base: &BaseFunction, bp: &BlockParams, order: usize, x1: &BigRational) -> Result<AxisDerivative> {
    let rho = rational_from_f64(bp.rho);
    let y1 = x1 / &rho - rational_from_f64(bp.q);
    let d = base.axis_x2_derivative_exact(order, &y1)?;
    Ok(d.scaled(&pow_rational(&(BigRational::one() / rho), order)))
}

/// `∂^{order}_{x₂} f_{q,ρ}(p)` at the center, exactly.
pub fn block_axis_derivative(base: &BaseFunction, bp: &BlockParams, order: usize) -> Result<AxisDerivative> {
    let p = rational_from_f64(bp.rho) * rational_from_f64(bp.q);
    block_axis_derivative_at(base, bp, order, &p)
}

/// Center lower bound `|∂^{2n}_{x₂} f(p)| ≥ (2n)! M_{2n}/(4ⁿ ρ^{2n})` for `n ≤ nmax`, exactly.
pub fn block_center_lower_check(base: &BaseFunction, bp: &BlockParams, nmax: usize) -> Result<Vec<LowerBoundRow>> {
    let rho = rational_from_f64(bp.rho);
    let mut rows = Vec::new();
    for n in 0..=nmax {
        let order = 2 * n;
        let d = block_axis_derivative(base, bp, order)?;
        let value = d.exact_value.clone().expect("exact");
        let tail = d.exact_tail.clone().expect("exact");
        let bound = BigRational::from_integer(factorial(order)) * base.exact_m(order as u64)?
            / (BigRational::from_integer(BigInt::one() << order) * pow_rational(&rho, order));
        rows.push(LowerBoundRow {
            n,
            value_log: ln_rational(&value.abs()),
            tail_log: ln_rational(&tail),
            bound_log: ln_rational(&bound),
            sign_ok: d.value.sign() == if n % 2 == 1 { -1 } else { 1 },
            pass: value.abs() - tail >= bound,
        });
    }
    Ok(rows)
}

/// Checks the block bound `|∂^α f_{q,ρ}(x)| ≤ 64ρ² 8^{|α|+1} α! M_{α₂}/(‖x−p‖²+ρ²)^{1+|α|/2}`
/// at `count` random points `p + a/16` with `‖a/16‖_∞ ≤ 2`.
pub fn block_upper_sweep(base: &BaseFunction, bp: &BlockParams, seed: u64, count: usize, dmax: usize) -> Result<BoundReport> {
    use rand::Rng;
    let mut g = sampling::rng(seed);
    let p = bp.center();
    let points: Vec<[f64; 2]> = (0..count)
        .map(|_| {
            // dyadic offsets keep the exact arithmetic small
            let a = g.random_range(-32..=32) as f64 / 16.0;
            let b = g.random_range(-32..=32) as f64 / 16.0;
            [p[0] + a, b]
        })
        .collect();
    let parts: Vec<Vec<BoundSample>> = points
        .par_iter()
        .map(|&x| upper_point(base, x, p, bp.rho, dmax))
        .collect::<Result<_>>()?;
    let mut report = BoundReport::merge("block", base.is_exact(), dmax, parts);
    report.seed = Some(seed);
    report.constant = Some(64.0);
    Ok(report)
}

/// Outcomes of `|∂^α g/α!| ≤ C^{|α|+1}(1+qρ)^{α₂} M_{|α|}` at one polar point,
/// and the smallest `C` that fits there.
///
/// The dropped series terms are charged `C₀^{|α|+1}(1+qρ)^{α₂} M_{|α|} 2^{1−K}` with
/// the brick constant `C₀ = 8⁵`, valid on the sampled parameter range.
pub fn polar_block_point(
    base: &BaseFunction,
    bp: &BlockParams,
    r: f64,
    theta: f64,
    dmax: usize,
    c: f64,
) -> Result<(Vec<BoundSample>, f64)> {
    let jet = polar_block_jet(base, bp, r, theta, dmax)?;
    let ln_q = (1.0 + bp.q * bp.rho).ln();
    let (ln_c, ln_c0, ln_tail) = (c.ln(), DEFAULT_POLAR_CONSTANT.ln(), tail_factor_log(base.terms));
    let mut out = Vec::new();
    let mut best_c: f64 = 0.0;
    for alpha in multiindices(dmax) {
        let order = alpha.0 + alpha.1;
        let shape = alpha.1 as f64 * ln_q + base.seq.log_m(order as u64)?;
        let partial = LogMagnitude::from_f64(jet.coeff(alpha.0, alpha.1).abs());
        let lhs = partial + LogMagnitude::from_log(shape + (order + 1) as f64 * ln_c0 + ln_tail);
        let rhs_log = shape + (order + 1) as f64 * ln_c;
        if !partial.is_zero() {
            best_c = best_c.max(((partial.ln_abs() - shape) / (order + 1) as f64).exp());
        }
        let lhs_log = lhs.ln_abs();
        out.push(sample([r, theta], vec![bp.q, bp.rho], alpha, lhs_log, rhs_log, lhs_log <= rhs_log));
    }
    Ok((out, best_c))
}

/// Random block parameters for sweeps: `q ∈ [1, 4]`, `ρ ∈ [1/16, 15/16]`.
pub fn sample_block_params(g: &mut rand_chacha::ChaCha8Rng) -> BlockParams {
    use rand::Rng;
    BlockParams {
        q: g.random_range(1.0..=4.0),
        rho: g.random_range(1.0 / 16.0..=15.0 / 16.0),
    }
}

/// Float sweep of the polar block estimate. Requires `M₀ = M₁ = 1`.
pub fn polar_block_bound_check(
    base: &BaseFunction,
    params: Option<BlockParams>,
    seed: u64,
    count: usize,
    dmax: usize,
    c: f64,
) -> Result<BoundReport> {
    let seq = &base.seq;
    if seq.log_m(0)?.abs() > 1e-15 || seq.log_m(1)?.abs() > 1e-15 {
        return Err(Error::Precondition(format!(
            "the polar block estimate needs M_0 = M_1 = 1; {} has M_1 = {}",
            seq.spec(),
            seq.value_f64(1)?
        )));
    }
    let points = sampling::polar_points(seed, count);
    let mut g = sampling::rng(seed.wrapping_add(1));
    let inputs: Vec<(BlockParams, [f64; 2])> = points
        .into_iter()
        .map(|pt| (params.unwrap_or_else(|| sample_block_params(&mut g)), pt))
        .collect();
    let parts: Vec<(Vec<BoundSample>, f64)> = inputs
        .par_iter()
        .map(|(p, [r, t])| polar_block_point(base, p, *r, *t, dmax, c))
        .collect::<Result<_>>()?;
    let mut report = BoundReport::new("polar-block", false, dmax);
    report.seed = Some(seed);
    report.constant = Some(c);
    for (samples, b) in parts {
        report.push_point(samples);
        report.observe_constant(b);
    }
    Ok(report)
}

/// One row of an axis profile of `h`.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub h_x1_axis: f64,
    pub h_x2_axis: f64,
}

/// `h(t, 0)` and `h(0, t)` on `count` evenly spaced points of `[−radius, radius]`.
pub fn axis_profile(base: &BaseFunction, radius: f64, count: usize) -> Vec<ProfileRow> {
    (0..count)
        .map(|i| {
            let t = if count > 1 { -radius + 2.0 * radius * i as f64 / (count - 1) as f64 } else { 0.0 };
            ProfileRow {
                t,
                h_x1_axis: base.eval([t, 0.0]).0,
                h_x2_axis: base.eval([0.0, t]).0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_difference_check, DEFAULT_STEP};

    fn gevrey1() -> WeightSequence {
        WeightSequence::gevrey(1.0).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_weights_for_gevrey() {
        let b = BaseFunction::new(&gevrey1(), 4).unwrap();
        let w = b.exact_weights_table().unwrap();
        // w_0 = 1/φ(1) = 1, w_1 = 4/(2·φ(2)) = 4/16, w_2 = 9/(4·φ(3)) = 9/162
        assert_eq!(w[0].0, q(1, 1));
        assert_eq!(w[1].0, q(1, 4));
        assert_eq!(w[2].0, q(1, 18));
        // closed form via φ(m_k) = m_k^{k+2}/M_k: w_k = k!/(2^k (k+1)^k)
        assert_eq!(w[3].0, q(6, 8 * 64));
    }

    #[test]
    fn partial_sums_increase_within_tail() {
        let b = BaseFunction::new(&gevrey1(), 40).unwrap();
        let w = b.exact_weights_table().unwrap();
        let mut s = BigRational::zero();
        let mut partial = Vec::new();
        for (wk, _) in w {
            assert!(wk.is_positive());
            s += wk;
            partial.push(s.clone());
        }
        assert!(partial.windows(2).all(|p| p[0] < p[1]));
        for (k, p) in partial.iter().enumerate() {
            // everything after term k is below 2^{-k}
            assert!(&s - p <= q(1, 1) / BigRational::from_integer(BigInt::one() << k));
        }
        let (v, tail) = b.eval_exact(&[q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(v, s);
        assert_eq!(tail, q(1, 1) / BigRational::from_integer(BigInt::one() << 39));
        let (vf, _) = b.eval([0.0, 0.0]);
        assert!((vf - v.to_f64()).abs() < 1e-14);
    }

    #[test]
    fn symmetric_and_positive() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        for x in sampling::cartesian_points(3, 50, 3.0) {
            let (a, _) = b.eval(x);
            let (c, _) = b.eval([x[0], -x[1]]);
            assert!(a > 0.0);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn axis_closed_form_matches_jets() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        for x1 in [q(0, 1), q(1, 2), q(-3, 4)] {
            let jet = b.jet([x1.clone(), q(0, 1)], 8).unwrap();
            for order in 0..=8 {
                let d = b.axis_x2_derivative_exact(order, &x1).unwrap();
                assert_eq!(d.exact_value.clone().unwrap(), jet.derivative((0, order)).unwrap(), "order {order}");
                assert_eq!(d.odd_symmetry_zero, order % 2 == 1);
            }
        }
        let (h0, _) = b.eval_exact(&[q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(b.axis_x2_derivative_exact(0, &q(0, 1)).unwrap().exact_value.unwrap(), h0);
    }

    #[test]
    fn float_axis_agrees_with_exact() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        for order in [0, 2, 4, 8] {
            let e = b.axis_x2_derivative_exact(order, &q(1, 2)).unwrap();
            let f = b.axis_x2_derivative_log(order, 0.5).unwrap();
            assert_eq!(e.value.sign(), f.value.sign());
            assert!((e.value.ln_abs() - f.value.ln_abs()).abs() < 1e-12);
            assert!((e.tail_bound.ln_abs() - f.tail_bound.ln_abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn second_derivative_at_origin() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let d = b.axis_x2_derivative_exact(2, &q(0, 1)).unwrap();
        let v = d.exact_value.unwrap();
        assert!(v.is_negative());
        assert!(v.abs() >= q(1, 1));
    }

    #[test]
    fn lower_bound_with_tail() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let rows = base_lower_check(&b, 8).unwrap();
        assert_eq!(rows.len(), 9);
        for r in &rows {
            assert!(r.pass, "{r:?}");
            assert!(r.sign_ok);
        }
    }

    #[test]
    fn lower_bound_needs_the_zeroth_term() {
        // without k = 0 the value at the origin is below M_0 = 1
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let w = b.exact_weights_table().unwrap();
        let without_first: BigRational = w[1..].iter().map(|t| t.0.clone()).sum();
        assert!(without_first < q(1, 1));
    }

    #[test]
    fn upper_bound_on_grid() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let r = base_upper_check(&b, &sampling::square_grid(5, 2.0), 6).unwrap();
        assert!(r.exact);
        assert_eq!(r.points, 25);
        assert_eq!(r.checks, 25 * 28);
        assert!(r.passed(), "{:?}", r.worst);
        // (0,0) at the origin: |h| ≤ 512
        let origin = r.entries.iter().find(|e| e.point == [0.0, 0.0]).unwrap();
        assert!(origin.pass);
    }

    #[test]
    fn upper_margin_grows_away_from_origin() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let near = base_upper_check(&b, &[[0.0, 0.0]], 3).unwrap();
        let far = base_upper_check(&b, &[[3.0, 3.0]], 3).unwrap();
        assert!(far.worst_margin_log() > near.worst_margin_log());
    }

    #[test]
    fn float_upper_check_for_log_power() {
        let lp = WeightSequence::log_power(std::f64::consts::E).unwrap();
        let b = BaseFunction::new(&lp, 60).unwrap();
        assert!(!b.is_exact());
        let r = base_upper_check(&b, &sampling::square_grid(3, 1.0), 4).unwrap();
        assert!(!r.exact);
        assert!(r.passed(), "{:?}", r.worst);
        assert!(base_lower_check(&b, 4).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn jets_match_finite_differences() {
        // short truncation, and x₂ stretched by m_max so every bump has unit width
        let b = BaseFunction::new(&gevrey1(), 6).unwrap();
        let m_max = 6.0;
        let f = |a: f64, c: f64| b.eval([a, c / m_max]).0;
        for x in sampling::cartesian_points(11, 5, 1.0) {
            let jet = b.jet(x, 4).unwrap();
            for alpha in multiindices(4) {
                let exact = jet.derivative(alpha).unwrap() / m_max.powi(alpha.1 as i32);
                let fd = finite_difference_check(f, [x[0], x[1] * m_max], alpha, DEFAULT_STEP);
                let scale = exact.abs().max(1.0);
                assert!((exact - fd).abs() <= 1e-6 * scale, "{alpha:?} at {x:?}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn block_center_is_h_origin() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let bp = BlockParams::new(2.0, 0.5).unwrap();
        let jet = block_jet(&b, &bp, [q(1, 1), q(0, 1)], 0).unwrap();
        let (h0, _) = b.eval_exact(&[q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(jet.value(), &h0);
        // f(p + y) = h(y/ρ)
        for (y1, y2) in [(q(1, 3), q(-1, 5)), (q(-2, 7), q(3, 4))] {
            let f = block_jet(&b, &bp, [q(1, 1) + &y1, y2.clone()], 0).unwrap();
            let (h, _) = b.eval_exact(&[y1 * q(2, 1), y2 * q(2, 1)]).unwrap();
            assert_eq!(f.value(), &h);
        }
    }

    #[test]
    fn block_center_lower_bound() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let bp = BlockParams::new(2.0, 0.5).unwrap();
        let d = block_axis_derivative(&b, &bp, 2).unwrap();
        let v = d.exact_value.clone().unwrap();
        assert!(v.abs() - d.exact_tail.unwrap() >= q(4, 1));
        let jet = block_jet(&b, &bp, [q(1, 1), q(0, 1)], 2).unwrap();
        assert_eq!(jet.derivative((0, 2)).unwrap(), v);
        assert!(block_center_lower_check(&b, &bp, 6).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn block_upper_sweep_passes() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let bp = BlockParams::new(1.5, 0.25).unwrap();
        let r = block_upper_sweep(&b, &bp, 7, 20, 4).unwrap();
        assert!(r.exact);
        assert!(r.passed(), "{:?}", r.worst);
    }

    #[test]
    fn polar_block_sweep_passes() {
        let b = BaseFunction::new(&gevrey1(), default_terms(5)).unwrap();
        let r = polar_block_bound_check(&b, None, 5, 100, 5, DEFAULT_BLOCK_POLAR_CONSTANT).unwrap();
        assert!(r.passed(), "{:?}", r.worst);
        let c = r.empirical_constant.unwrap();
        assert!(c > 0.0 && c < DEFAULT_BLOCK_POLAR_CONSTANT);
    }

    #[test]
    fn polar_block_matches_cartesian() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let bp = BlockParams::new(2.0, 0.3).unwrap();
        for [r, t] in sampling::polar_points(9, 20) {
            let g = polar_block_jet(&b, &bp, r, t, 0).unwrap();
            let f = block_jet(&b, &bp, [r * t.cos(), r * t.sin()], 0).unwrap();
            assert!((g.value() - f.value()).abs() <= 1e-14);
        }
    }

    #[test]
    fn polar_block_needs_unit_first_ratio() {
        let b = BaseFunction::new(&WeightSequence::gevrey(1.0).unwrap().shift(2).unwrap(), 20).unwrap();
        assert!(matches!(
            polar_block_bound_check(&b, None, 1, 1, 1, DEFAULT_BLOCK_POLAR_CONSTANT),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn profile_peaks_at_origin() {
        let b = BaseFunction::new(&gevrey1(), 60).unwrap();
        let rows = axis_profile(&b, 2.0, 5);
        assert_eq!(rows[2].t, 0.0);
        assert!(rows.iter().all(|r| r.h_x1_axis <= rows[2].h_x1_axis && r.h_x2_axis <= rows[2].h_x2_axis));
    }
}
