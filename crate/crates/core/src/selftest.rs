//! The bundled acceptance checks, one [`CheckResult`] per criterion.
//!
//! Each criterion runs at a fixed configuration (seeds, sample counts, orders,
//! tolerances) so that the outcome is reproducible and comparable across runs.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::blocks::{
    base_lower_check, base_upper_check, block_jet, default_terms, polar_block_bound_check, BaseFunction, BlockParams,
    DEFAULT_BLOCK_POLAR_CONSTANT,
};
use crate::bricks::{
    brick_eval, brick_jet, cauchy_sweep, inverse_quadratic_jet, polar_brick_sweep, sample_params,
    DEFAULT_POLAR_CONSTANT,
};
use crate::counterexample::{build_counterexample, DEFAULT_HORIZON, DEFAULT_PAIRS};
use crate::error::{Error, Result};
use crate::flat::{
    build_gamma, delta_gaps, lower_bound_certificate, polar_upper_bound_sweep, sharpness_certificate,
    upper_bound_sweep, EFunction, DEFAULT_FLAT_POLAR_CONSTANT, DEFAULT_LAMBDA_MAX,
};
use crate::numerics::{finite_difference_check, Jet2, DEFAULT_STEP};
use crate::ostrowski::verify_phi_identity;
use crate::report::CheckResult;
use crate::sampling::{self, DEFAULT_SEED};
use crate::weights::{density_estimate, square_vs_shift_diagnostic, WeightSequence};

/// Relative tolerance of the finite-difference cross-checks.
pub const FD_TOLERANCE: f64 = 1e-6;
/// Tolerance on `|Δ ln|` for the floating Ostrowski identity.
pub const PHI_LOG_TOLERANCE: f64 = 1e-12;

/// One acceptance criterion with its time budget.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    /// Tolerance or decision mode, as printed in reports.
    pub tolerance: &'static str,
    pub budget_secs: u64,
    #[serde(skip)]
    run: fn() -> Result<CheckResult>,
}

impl Criterion {
    pub fn budget(&self) -> Duration {
        Duration::from_secs(self.budget_secs)
    }

    /// Runs the check. Errors become failed results.
    pub fn run(&self) -> CheckResult {
        match (self.run)() {
            Ok(r) => r,
            Err(e) => CheckResult::new(self.name, false, format!("error: {e}")),
        }
    }

    /// Runs the check and folds the time budget into the verdict.
    pub fn run_timed(&self) -> (CheckResult, Duration) {
        let start = Instant::now();
        let mut r = self.run();
        let elapsed = start.elapsed();
        if elapsed > self.budget() && !r.failed() {
            r = CheckResult::new(
                self.name,
                false,
                format!("{} (over budget: {:.2}s > {}s)", r.detail, elapsed.as_secs_f64(), self.budget_secs),
            )
            .with_payload(&r.payload);
        }
        (r, elapsed)
    }
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: 1,
        name: "ostrowski-identity",
        tolerance: "exact (gevrey:1, k<=50); |dlog|<=1e-12 (logpow, counterexample, k<=30)",
        budget_secs: 1,
        run: ostrowski_identity,
    },
    Criterion {
        id: 2,
        name: "cauchy-brick-bound",
        tolerance: "exact, 100 rational (c,x), |a|<=8",
        budget_secs: 10,
        run: cauchy_bound,
    },
    Criterion {
        id: 3,
        name: "base-lower-bound",
        tolerance: "exact, gevrey:1, n<=8",
        budget_secs: 5,
        run: base_lower,
    },
    Criterion {
        id: 4,
        name: "base-upper-bound",
        tolerance: "exact, 25-point grid, |a|<=6, K=60",
        budget_secs: 30,
        run: base_upper,
    },
    Criterion {
        id: 5,
        name: "polar-bounds",
        tolerance: "margins>=0, C=8^5 (brick, |a|<=6) and 2*8^5 (block, |a|<=5), 200 samples",
        budget_secs: 60,
        run: polar_bounds,
    },
    Criterion {
        id: 6,
        name: "flat-lower-certificate",
        tolerance: "exact, gevrey:1, E=sqrt, first two entries of Lambda",
        budget_secs: 30,
        run: flat_lower,
    },
    Criterion {
        id: 7,
        name: "flat-upper-bounds",
        tolerance: "margins>=0, 50 samples, |a|<=5, C=2*8^5",
        budget_secs: 60,
        run: flat_upper,
    },
    Criterion {
        id: 8,
        name: "sharpness-table",
        tolerance: "strict increase (N=gevrey:1.5); r<=8^((l+3)/l) (N=shift:2)",
        budget_secs: 60,
        run: sharpness,
    },
    Criterion {
        id: 9,
        name: "counterexample",
        tolerance: "exact a_k order; b_k<=4; gap sums>=0.9*pairs; identity 1e-12",
        budget_secs: 10,
        run: counterexample,
    },
    Criterion {
        id: 10,
        name: "oracle-cross-checks",
        tolerance: "relative 1e-6 (orders<=4); exact (axis orders<=8)",
        budget_secs: 30,
        run: oracles,
    },
    Criterion {
        id: 11,
        name: "weight-invariants",
        tolerance: "1e-12 in log (K=1000); exact Abel identity (n=100)",
        budget_secs: 5,
        run: weight_invariants,
    },
];

pub fn criterion(id: u32) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<(CheckResult, Duration)> {
    CRITERIA.iter().map(Criterion::run_timed).collect()
}

#[derive(Debug, Serialize)]
struct IdentityRow {
    family: String,
    k: u64,
    delta_log: f64,
    exact_equal: Option<bool>,
}

fn ostrowski_identity() -> Result<CheckResult> {
    let mut rows = Vec::new();
    let mut exact_ok = true;
    let g1 = WeightSequence::gevrey(1.0)?;
    for k in 0..=50 {
        let id = verify_phi_identity(&g1, k)?;
        exact_ok &= id.exact_equal == Some(true);
        rows.push(IdentityRow { family: g1.spec().into(), k, delta_log: id.delta_log, exact_equal: id.exact_equal });
    }
    let mut worst: Vec<(String, f64, usize)> = Vec::new();
    for seq in [WeightSequence::log_power(std::f64::consts::E)?, WeightSequence::parse("counterexample:8")?] {
        let (mut w, mut saturated): (f64, usize) = (0.0, 0);
        for k in 0..=30 {
            match verify_phi_identity(&seq, k) {
                Ok(id) => {
                    w = w.max(id.delta_log.abs());
                    rows.push(IdentityRow {
                        family: seq.spec().into(),
                        k,
                        delta_log: id.delta_log,
                        exact_equal: id.exact_equal,
                    });
                }
                // φ(m_k) has no finite maximizer in range: the identity cannot hold
                Err(Error::Saturated(_)) => {
                    saturated += 1;
                    w = f64::INFINITY;
                }
                Err(e) => return Err(e),
            }
        }
        worst.push((seq.spec().into(), w, saturated));
    }
    let float_ok = worst.iter().all(|(_, w, _)| *w <= PHI_LOG_TOLERANCE);
    let detail = format!(
        "gevrey:1 exact equality k<=50: {exact_ok}; max |dlog| {}",
        worst
            .iter()
            .map(|(s, w, n)| format!("{s}={w:.3e} ({n} saturated)"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(CheckResult::new("ostrowski-identity", exact_ok && float_ok, detail).with_payload(&rows))
}

fn cauchy_bound() -> Result<CheckResult> {
    Ok(CheckResult::from_bound("cauchy-brick-bound", &cauchy_sweep(DEFAULT_SEED, 100, 8)?))
}

fn base_lower() -> Result<CheckResult> {
    let base = BaseFunction::new(&WeightSequence::gevrey(1.0)?, default_terms(16))?;
    let rows = base_lower_check(&base, 8)?;
    let pass = base.is_exact() && rows.iter().all(|r| r.pass && r.sign_ok);
    let worst = rows.iter().map(|r| r.value_log - r.bound_log).fold(f64::INFINITY, f64::min);
    let detail = format!("{} orders, exact, smallest log(value/bound) {worst:.6}", rows.len());
    Ok(CheckResult::new("base-lower-bound", pass, detail).with_payload(&rows))
}

fn base_upper() -> Result<CheckResult> {
    let base = BaseFunction::new(&WeightSequence::gevrey(1.0)?, 60)?;
    let report = base_upper_check(&base, &sampling::square_grid(5, 2.0), 6)?;
    let mut r = CheckResult::from_bound("base-upper-bound", &report);
    if !report.exact {
        r = CheckResult::new("base-upper-bound", false, "not decided exactly").with_payload(&report);
    }
    Ok(r)
}

fn polar_bounds() -> Result<CheckResult> {
    let brick = polar_brick_sweep(None, DEFAULT_SEED, 200, 6, DEFAULT_POLAR_CONSTANT)?;
    let base = BaseFunction::new(&WeightSequence::gevrey(1.0)?, default_terms(5))?;
    let block = polar_block_bound_check(&base, None, DEFAULT_SEED, 200, 5, DEFAULT_BLOCK_POLAR_CONSTANT)?;
    let detail = format!(
        "brick: {} failures of {}, empirical C {:.3}; block: {} failures of {}, empirical C {:.3}",
        brick.failures,
        brick.checks,
        brick.empirical_constant.unwrap_or(f64::NAN),
        block.failures,
        block.checks,
        block.empirical_constant.unwrap_or(f64::NAN)
    );
    Ok(CheckResult::new("polar-bounds", brick.passed() && block.passed(), detail).with_payload(&[brick, block]))
}

fn gevrey_gamma() -> Result<crate::flat::GammaData> {
    build_gamma(&WeightSequence::gevrey(1.0)?, EFunction::Sqrt, DEFAULT_LAMBDA_MAX, None)
}

fn flat_lower() -> Result<CheckResult> {
    let g = gevrey_gamma()?;
    let gaps = delta_gaps(&g)?;
    let lambdas = g.lambdas();
    let cert = lower_bound_certificate(&g, &gaps, &lambdas[..2])?;
    let detail = format!(
        "lambda {:?}: margins (log) {}; bracket {}",
        &lambdas[..2],
        cert.rows.iter().map(|r| format!("{:.4}", r.lhs_log - r.rhs_log)).collect::<Vec<_>>().join(", "),
        cert.rows.iter().all(|r| r.bracket_ok && r.cross_ok && r.dominant_ok)
    );
    Ok(CheckResult::new("flat-lower-certificate", cert.pass, detail).with_payload(&cert))
}

fn flat_upper() -> Result<CheckResult> {
    let g = gevrey_gamma()?;
    let cart = upper_bound_sweep(&g, DEFAULT_SEED, 50, 5)?;
    let polar = polar_upper_bound_sweep(&g, DEFAULT_SEED, 50, 5, DEFAULT_FLAT_POLAR_CONSTANT)?;
    let detail = format!(
        "cartesian: {} failures of {}, worst margin {:.4}; polar: {} failures of {}, worst margin {:.4}",
        cart.failures,
        cart.checks,
        cart.worst_margin_log(),
        polar.failures,
        polar.checks,
        polar.worst_margin_log()
    );
    Ok(CheckResult::new("flat-upper-bounds", cart.passed() && polar.passed(), detail).with_payload(&[cart, polar]))
}

fn sharpness() -> Result<CheckResult> {
    let g = gevrey_gamma()?;
    let strict = sharpness_certificate(&g, &WeightSequence::gevrey(1.5)?, None)?;
    let cons = sharpness_certificate(&g, &g.seq.shift(2)?, None)?;
    let detail = format!(
        "N=gevrey:1.5 r = [{}] increasing {}; N=shift:2 fitted constant {:.4}, within bound {}",
        strict.rows.iter().map(|r| format!("{:.4}", r.ratio_root)).collect::<Vec<_>>().join(", "),
        strict.strictly_increasing,
        cons.fitted_constant,
        cons.within_upper_bound
    );
    Ok(CheckResult::new("sharpness-table", strict.pass && cons.pass, detail).with_payload(&[strict, cons]))
}

fn counterexample() -> Result<CheckResult> {
    let c = build_counterexample(DEFAULT_PAIRS)?;
    let convex = c.verify_log_convex(DEFAULT_HORIZON)?;
    let closed = c.verify_diff_closed(DEFAULT_HORIZON)?;
    let quasi = c.verify_quasianalytic_diag(DEFAULT_HORIZON)?;
    let gap = c.verify_strict_gap(DEFAULT_HORIZON)?;
    let pass = convex.pass && closed.pass && quasi.pass && gap.pass;
    let detail = format!(
        "a_k nondecreasing {} ({} violations, first at {:?}); max b_k {:.4}; gap sums pass {}; identity err {:.2e}, g=1 at {:?}, min g {:.4}",
        convex.pass,
        convex.violations,
        convex.first_violations.first().map(|v| v.k),
        closed.max_b,
        quasi.pass,
        gap.max_identity_error,
        gap.first_unit,
        gap.min_g
    );
    Ok(CheckResult::new("counterexample", pass, detail).with_payload(&serde_json::json!({
        "log_convex": convex,
        "diff_closed": closed,
        "quasianalytic": quasi,
        "strict_gap": gap,
    })))
}

#[derive(Debug, Default, Serialize)]
struct OracleSummary {
    fd_checks: usize,
    fd_failures: usize,
    worst_relative: f64,
    axis_checks: usize,
    axis_failures: usize,
}

impl OracleSummary {
    fn fd(&mut self, exact: f64, fd: f64) {
        self.fd_checks += 1;
        let rel = (exact - fd).abs() / exact.abs().max(1.0);
        self.worst_relative = self.worst_relative.max(rel);
        if rel > FD_TOLERANCE {
            self.fd_failures += 1;
        }
    }
}

fn oracles() -> Result<CheckResult> {
    let mut s = OracleSummary::default();
    let mut g = sampling::rng(DEFAULT_SEED);
    // brick, differenced in its natural units (ρ along x₁, ρ/m along x₂)
    for _ in 0..10 {
        let p = sample_params(&mut g);
        let x = [g.random_range(-0.5..2.0), g.random_range(-1.0..1.0)];
        let jet = brick_jet(&p, x, 4)?;
        let (s1, s2) = (p.rho, p.rho / p.m);
        let f = |a: f64, b: f64| brick_eval(&p, [x[0] + s1 * a, x[1] + s2 * b]);
        for order in 1..=4 {
            for (alpha, d) in jet.derivatives_of_order(order)? {
                let exact = d * s1.powi(alpha.0 as i32) * s2.powi(alpha.1 as i32);
                s.fd(exact, finite_difference_check(f, [0.0, 0.0], alpha, DEFAULT_STEP));
            }
        }
    }
    // 1/(c + |x|²)
    for _ in 0..10 {
        let c: f64 = g.random_range(0.5..2.0);
        let x = [g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)];
        let jet = inverse_quadratic_jet(c, x, 4)?;
        let f = |a: f64, b: f64| 1.0 / (c + a * a + b * b);
        for order in 1..=4 {
            for (alpha, d) in jet.derivatives_of_order(order)? {
                s.fd(d, finite_difference_check(f, x, alpha, DEFAULT_STEP));
            }
        }
    }
    // short truncations of h and of a block, with x₂ stretched by the largest m_k
    let seq = WeightSequence::gevrey(1.0)?;
    let short = BaseFunction::new(&seq, 6)?;
    let m_max = 6.0;
    let bp = BlockParams::new(2.0, 0.5)?;
    for x in sampling::cartesian_points(DEFAULT_SEED, 5, 1.0) {
        let h = |a: f64, b: f64| short.eval([a, b / m_max]).0;
        let blk = |a: f64, b: f64| short.eval([a / bp.rho - bp.q, b / (m_max * bp.rho)]).0;
        let jh = short.jet(x, 4)?;
        let xb = [bp.center()[0] + x[0] * bp.rho, x[1] * bp.rho];
        let jb = block_jet(&short, &bp, xb, 4)?;
        for order in 1..=4 {
            for (alpha, d) in jh.derivatives_of_order(order)? {
                let exact = d / m_max.powi(alpha.1 as i32);
                s.fd(exact, finite_difference_check(h, [x[0], x[1] * m_max], alpha, DEFAULT_STEP));
            }
            for (alpha, d) in jb.derivatives_of_order(order)? {
                let exact = d / (m_max.powi(alpha.1 as i32)) * bp.rho.powi(order as i32);
                let at = [xb[0] / bp.rho, xb[1] * m_max / bp.rho];
                let scaled = |a: f64, b: f64| blk(a * bp.rho, b * bp.rho);
                s.fd(exact, finite_difference_check(scaled, at, alpha, DEFAULT_STEP));
            }
        }
    }
    // axis closed form against the exact jet of the truncated series
    let base = BaseFunction::new(&seq, 12)?;
    for x1 in [0i64, 1, -3] {
        let x1 = BigRational::from_integer(x1.into()) / BigRational::from_integer(2.into());
        let (y1, y2) = Jet2::coordinates([x1.clone(), BigRational::zero()], 8);
        let jet = base.of_jets(&y1, &y2)?;
        for order in 0..=8 {
            let d = base.axis_x2_derivative_exact(order, &x1)?;
            s.axis_checks += 1;
            if d.exact_value != Some(jet.derivative((0, order))?) {
                s.axis_failures += 1;
            }
        }
    }
    let pass = s.fd_failures == 0 && s.axis_failures == 0;
    let detail = format!(
        "{} finite-difference checks, worst relative {:.2e}; {} axis checks, {} mismatches",
        s.fd_checks, s.worst_relative, s.axis_checks, s.axis_failures
    );
    Ok(CheckResult::new("oracle-cross-checks", pass, detail).with_payload(&s))
}

fn weight_invariants() -> Result<CheckResult> {
    let g1 = WeightSequence::gevrey(1.0)?;
    let families = [
        WeightSequence::analytic(),
        g1.clone(),
        WeightSequence::gevrey(2.0)?,
        WeightSequence::log_power(std::f64::consts::E)?,
        g1.shift(2)?,
        g1.power(2.0)?,
    ];
    let mut bad = Vec::new();
    for f in &families {
        let r = square_vs_shift_diagnostic(f, 1000)?;
        if !r.inequality_violations.is_empty() || !r.square_violations.is_empty() {
            bad.push(format!(
                "{}: {} inequality, {} square violations",
                f.spec(),
                r.inequality_violations.len(),
                r.square_violations.len()
            ));
        }
    }
    let evens: Vec<u64> = (1..=50).map(|k| 2 * k).collect();
    let density = density_estimate(&evens, &[100])?;
    let abel = density.abel.iter().all(|a| a.equal);
    let detail = if bad.is_empty() {
        format!("{} families clean to K=1000; Abel identity exact at n=100: {abel}", families.len())
    } else {
        bad.join("; ")
    };
    Ok(CheckResult::new("weight-invariants", bad.is_empty() && abel, detail).with_payload(&density.abel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_sequential() {
        for (i, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.id as usize, i + 1);
        }
        assert!(criterion(12).is_none());
        assert_eq!(criterion(3).unwrap().name, "base-lower-bound");
    }

    #[test]
    fn quick_criteria_pass() {
        for id in [3, 10, 11] {
            let r = criterion(id).unwrap().run();
            assert!(!r.failed(), "{}: {}", r.name, r.detail);
        }
    }
}
