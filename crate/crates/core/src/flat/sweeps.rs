//! Floating evaluation of `F_Γ` and `G_Γ = F_Γ∘σ` and the two upper-bound sweeps.

use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;

use super::GammaData;
use crate::blocks::{block_of_jets, default_terms, BaseFunction, BlockParams};
use crate::bricks::{multiindices, polar_coordinates, sample, DEFAULT_POLAR_CONSTANT};
use crate::error::Result;
use crate::numerics::{ln_rational, Jet2, LogMagnitude};
use crate::report::{BoundReport, BoundSample};
use crate::sampling;

/// `C` of the polar estimate for `G_Γ`, the same as for a single blown-up block.
pub const DEFAULT_FLAT_POLAR_CONSTANT: f64 = crate::blocks::DEFAULT_BLOCK_POLAR_CONSTANT;

/// `(ln c_λ, block parameters)` of the stored blocks.
fn blocks(g: &GammaData) -> Vec<(f64, BlockParams)> {
    g.entries
        .iter()
        .map(|e| {
            let bp = BlockParams {
                q: e.q.to_f64().unwrap_or(f64::NAN),
                rho: e.rho.to_f64().unwrap_or(f64::NAN),
            };
            (ln_rational(&e.coeff), bp)
        })
        .collect()
}

fn ln2() -> f64 {
    std::f64::consts::LN_2
}

fn tail_factor_log(terms: usize) -> f64 {
    (1.0 - terms as f64) * ln2()
}

/// `F_Γ(x)` summed over the stored blocks, and a bound on what the truncation drops.
pub fn f_eval(g: &GammaData, base: &BaseFunction, x: [f64; 2]) -> (f64, f64) {
    let mut value = 0.0;
    let mut tail = 0.0;
    for (ln_c, bp) in blocks(g) {
        let (h, t) = base.eval([x[0] / bp.rho - bp.q, x[1] / bp.rho]);
        value += ln_c.exp() * h;
        tail += ln_c.exp() * t;
    }
    // blocks beyond lambda_max: c'' ≤ 2^{-λ''} and 0 < h ≤ 1
    (value, tail + (-(g.lambda_max as f64) * ln2()).exp())
}

/// Jet of `F_Γ` (stored blocks) at `x`.
pub fn f_jet(g: &GammaData, base: &BaseFunction, x: [f64; 2], degree: usize) -> Result<Jet2<f64>> {
    let (x1, x2) = Jet2::coordinates(x, degree);
    sum_blocks(g, base, &x1, &x2)
}

/// Jet of `G_Γ(r, θ) = F_Γ(r cos θ, r sin θ)` in `(r, θ)`.
pub fn g_jet(g: &GammaData, base: &BaseFunction, r: f64, theta: f64, degree: usize) -> Result<Jet2<f64>> {
    let (x1, x2) = polar_coordinates(r, theta, degree)?;
    sum_blocks(g, base, &x1, &x2)
}

fn sum_blocks(g: &GammaData, base: &BaseFunction, x1: &Jet2<f64>, x2: &Jet2<f64>) -> Result<Jet2<f64>> {
    let mut sum = Jet2::zero(*x1.base(), x1.degree());
    for (ln_c, bp) in blocks(g) {
        sum = sum.try_add(&block_of_jets(base, &bp, x1, x2)?.scale(&ln_c.exp()))?;
    }
    Ok(sum)
}

/// Checks `|∂^α F_Γ/α!| ≤ 8^{|α|+3} M_{|α|}²` for `|α| ≤ dmax`.
///
/// Sample points are drawn around the stored centers at the block scale. The
/// left side carries each block's `k`-tail `c_λ 8^{|α|+1} ρ_λ² M_{α₂} 2^{1−K}/s^{1+|α|/2}`
/// and the blocks beyond `lambda_max`, at most `64·8^{|α|+1} M_{α₂} M_{|α|} 2^{-L}`.
pub fn upper_bound_sweep(g: &GammaData, seed: u64, count: usize, dmax: usize) -> Result<BoundReport> {
    let base = BaseFunction::new(&g.seq, default_terms(dmax))?;
    let bl = blocks(g);
    let mut rng = sampling::rng(seed);
    let points: Vec<[f64; 2]> = (0..count)
        .map(|i| {
            let bp = bl[i % bl.len()].1;
            let c = bp.center();
            [
                c[0] + bp.rho * rng.random_range(-2.0..=2.0),
                bp.rho * rng.random_range(-2.0..=2.0),
            ]
        })
        .collect();
    let ln8 = 8f64.ln();
    let ln_tail = tail_factor_log(base.terms());
    let ln_dropped = 64f64.ln() - g.lambda_max as f64 * ln2();
    let parts: Vec<(Vec<BoundSample>, f64)> = points
        .par_iter()
        .map(|&x| -> Result<(Vec<BoundSample>, f64)> {
            let jet = f_jet(g, &base, x, dmax)?;
            let mut out = Vec::new();
            let mut best: f64 = 0.0;
            for alpha in multiindices(dmax) {
                let order = alpha.0 + alpha.1;
                let log_m = g.seq.log_m(order as u64)?;
                let log_m2 = g.seq.log_m(alpha.1 as u64)?;
                let mut lhs = LogMagnitude::from_f64(jet.coeff(alpha.0, alpha.1).abs());
                if !lhs.is_zero() {
                    best = best.max(((lhs.ln_abs() - 2.0 * log_m) / (order + 3) as f64).exp());
                }
                for (ln_c, bp) in &bl {
                    let d1 = x[0] - bp.center()[0];
                    let ln_s = (d1 * d1 + x[1] * x[1] + bp.rho * bp.rho).ln();
                    let shape = ln_c + (order + 1) as f64 * ln8 + 2.0 * bp.rho.ln() + log_m2
                        - (1.0 + order as f64 / 2.0) * ln_s;
                    lhs = lhs + LogMagnitude::from_log(shape + ln_tail);
                }
                lhs = lhs + LogMagnitude::from_log(ln_dropped + (order + 1) as f64 * ln8 + log_m2 + log_m);
                let rhs_log = (order + 3) as f64 * ln8 + 2.0 * log_m;
                let lhs_log = lhs.ln_abs();
                out.push(sample(x, vec![], alpha, lhs_log, rhs_log, lhs_log <= rhs_log));
            }
            Ok((out, best))
        })
        .collect::<Result<_>>()?;
    let mut report = BoundReport::new("flat", false, dmax);
    report.seed = Some(seed);
    report.constant = Some(8.0);
    for (samples, b) in parts {
        report.push_point(samples);
        report.observe_constant(b);
    }
    Ok(report)
}

/// Checks `|∂^α G_Γ/α!| ≤ (2C)^{|α|+1} M_{|α|}` for `|α| ≤ dmax` at polar samples.
///
/// Each block's polar estimate carries `(1 + q_λρ_λ)^{α₂} ≤ 2^{α₂}` since `E ≤ 1`.
/// The `k`-tails are charged with the brick constant as in the single-block sweep,
/// and the blocks beyond `lambda_max` with `C^{|α|+1} 2^{|α|} M_{|α|} 2^{-L}`.
/// The reported empirical constant is the smallest `C` of this shape at each point.
pub fn polar_upper_bound_sweep(g: &GammaData, seed: u64, count: usize, dmax: usize, c: f64) -> Result<BoundReport> {
    let base = BaseFunction::new(&g.seq, default_terms(dmax))?;
    let bl = blocks(g);
    let points = sampling::polar_points(seed, count);
    let (ln_c, ln_c0) = (c.ln(), DEFAULT_POLAR_CONSTANT.ln());
    let ln_tail = tail_factor_log(base.terms());
    let parts: Vec<(Vec<BoundSample>, f64)> = points
        .par_iter()
        .map(|&[r, theta]| -> Result<(Vec<BoundSample>, f64)> {
            let jet = g_jet(g, &base, r, theta, dmax)?;
            let mut out = Vec::new();
            let mut best: f64 = 0.0;
            for alpha in multiindices(dmax) {
                let order = alpha.0 + alpha.1;
                let log_m = g.seq.log_m(order as u64)?;
                let mut lhs = LogMagnitude::from_f64(jet.coeff(alpha.0, alpha.1).abs());
                if !lhs.is_zero() {
                    best = best.max(0.5 * ((lhs.ln_abs() - log_m) / (order + 1) as f64).exp());
                }
                for (ln_coeff, bp) in &bl {
                    let ln_q = (1.0 + bp.q * bp.rho).ln();
                    lhs = lhs
                        + LogMagnitude::from_log(
                            ln_coeff + (order + 1) as f64 * ln_c0 + alpha.1 as f64 * ln_q + log_m + ln_tail,
                        );
                }
                lhs = lhs
                    + LogMagnitude::from_log(
                        (order + 1) as f64 * ln_c + order as f64 * ln2() + log_m - g.lambda_max as f64 * ln2(),
                    );
                let rhs_log = (order + 1) as f64 * (ln_c + ln2()) + log_m;
                let lhs_log = lhs.ln_abs();
                out.push(sample([r, theta], vec![], alpha, lhs_log, rhs_log, lhs_log <= rhs_log));
            }
            Ok((out, best))
        })
        .collect::<Result<_>>()?;
    let mut report = BoundReport::new("polar-flat", false, dmax);
    report.seed = Some(seed);
    report.constant = Some(c);
    for (samples, b) in parts {
        report.push_point(samples);
        report.observe_constant(b);
    }
    Ok(report)
}
