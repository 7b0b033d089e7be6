use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use blowdown::blocks::{
    base_lower_check, base_upper_check, block_upper_sweep, default_terms, polar_block_bound_check, BaseFunction,
    BlockParams, DEFAULT_BLOCK_POLAR_CONSTANT,
};
use blowdown::bricks::{cauchy_sweep, polar_brick_sweep, DEFAULT_POLAR_CONSTANT};
use blowdown::counterexample::{build_counterexample, slow_sequence_report, DEFAULT_HORIZON, DEFAULT_PAIRS};
use blowdown::flat::{
    build_gamma, delta_gaps, lower_bound_certificate, sharpness_certificate, EFunction, GammaSummary,
    DEFAULT_LAMBDA_MAX,
};
use blowdown::ostrowski::{phi_grid, verify_phi_identity};
use blowdown::report::{CheckResult, ReportEnvelope, Status};
use blowdown::sampling::{self, DEFAULT_SEED};
use blowdown::selftest::{criterion, CRITERIA};
use blowdown::weights::{
    closure_diagnostic, compare, quasianalyticity_diagnostic, square_vs_shift_diagnostic, Trend, Verdict,
    DEFAULT_TREND_THRESHOLD,
};
use blowdown::{Error, WeightSequence};

#[derive(Parser, Debug)]
#[command(name = "blowdown", version, about = "Weight-sequence diagnostics and certified derivative bounds")]
struct Cli {
    /// Directory for the JSON report and CSV tables (also BLOWDOWN_OUT_DIR).
    #[arg(long, global = true, env = "BLOWDOWN_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte-stability).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Log-convexity, closure, quasianalyticity and square/shift diagnostics of one family.
    Analyze {
        #[arg(long)]
        family: String,
        #[arg(long = "K", default_value_t = 200)]
        horizon: u64,
    },
    /// Class comparison of N against M.
    Compare {
        #[arg(long = "N")]
        n: String,
        #[arg(long = "M")]
        m: String,
        #[arg(long = "K", default_value_t = 200)]
        horizon: u64,
    },
    /// Ostrowski function on a log-spaced grid, plus the identity at m_k.
    Ostrowski {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.5)]
        r_min: f64,
        #[arg(long, default_value_t = 100.0)]
        r_max: f64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Largest k for the identity check.
        #[arg(long = "K", default_value_t = 30)]
        horizon: u64,
    },
    /// Bound sweeps for bricks, the base function and blocks.
    VerifyBounds(VerifyArgs),
    /// Builds the flat-construction data and writes it as JSON.
    ConstructFlat {
        #[arg(long)]
        family: String,
        #[arg(long = "E", default_value = "sqrt")]
        e: String,
        #[arg(long, default_value_t = DEFAULT_LAMBDA_MAX)]
        lambda_max: u64,
    },
    /// Lower-bound certificate and sharpness table for a stored construction.
    Certify {
        /// JSON written by construct-flat.
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long = "N")]
        n: String,
        /// Indices to certify (default: every stored index but the last).
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<u64>>,
    },
    /// The slow step sequence: schedule, verification reports and (k, a_k, b_k, g_k).
    Counterexample {
        #[arg(long, default_value_t = DEFAULT_PAIRS)]
        pairs: usize,
        #[arg(long = "K", default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
    },
    /// Runs the bundled acceptance criteria.
    Selftest {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u32>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Target {
    Cauchy,
    Brick,
    PolarBrick,
    Base,
    Block,
    PolarBlock,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    target: Target,
    #[arg(long, default_value = "gevrey:1")]
    family: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    dmax: usize,
    /// Constant of the polar estimate (default 8^5 for bricks, 2·8^5 for blocks).
    #[arg(long = "C")]
    c: Option<f64>,
    /// Series terms of the base function (default max(60, 4·dmax)).
    #[arg(long = "K")]
    terms: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
}

/// A finished command: the report plus any CSV tables keyed by file stem.
struct Output {
    report: ReportEnvelope,
    tables: Vec<(String, Vec<u8>)>,
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> blowdown::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn parse_family(spec: &str) -> blowdown::Result<WeightSequence> {
    WeightSequence::parse(spec)
}

fn analyze(family: &str, horizon: u64) -> blowdown::Result<Output> {
    let m = parse_family(family)?;
    let mut report = ReportEnvelope::new("analyze", json!({ "family": m.spec(), "K": horizon }));
    let violation = m.first_log_convexity_violation(horizon)?;
    report.checks.push(CheckResult::new(
        "log-convexity",
        violation.is_none(),
        match violation {
            None => format!("m_k nondecreasing for k <= {horizon}"),
            Some(k) => format!("m_k decreases at k = {k}"),
        },
    ));
    let closure = closure_diagnostic(&m, horizon)?;
    report.checks.push(
        CheckResult::diagnostic(
            "closure",
            format!("sup (m_k)^(1/k) = {:.6} at k = {}", closure.sup.to_f64(), closure.argsup),
        )
        .with_payload(&closure),
    );
    let quasi = quasianalyticity_diagnostic(&m, horizon, DEFAULT_TREND_THRESHOLD)?;
    let label = match quasi.trend {
        Trend::DivergingLike => "diverging-like (quasianalytic)",
        Trend::ConvergingLike => "converging-like (non-quasianalytic)",
        Trend::Inconclusive => "inconclusive",
    };
    report
        .checks
        .push(CheckResult::diagnostic("quasianalyticity", format!("{label} at K = {horizon}")).with_payload(&quasi));
    let sq = square_vs_shift_diagnostic(&m, horizon)?;
    let clean = sq.inequality_violations.is_empty() && sq.square_violations.is_empty();
    report.checks.push(
        CheckResult::new(
            "square-vs-shift",
            clean,
            format!(
                "{} regularity-inequality and {} square violations; inf (M_k^2/M_2k)^(1/k) = {:.6}",
                sq.inequality_violations.len(),
                sq.square_violations.len(),
                sq.inf_square_shift.to_f64()
            ),
        )
        .with_payload(&sq),
    );
    Ok(Output { report, tables: vec![] })
}

fn compare_cmd(n: &str, m: &str, horizon: u64) -> blowdown::Result<Output> {
    let (n, m) = (parse_family(n)?, parse_family(m)?);
    let mut report = ReportEnvelope::new("compare", json!({ "N": n.spec(), "M": m.spec(), "K": horizon }));
    let c = compare(&n, &m, horizon)?;
    let label = match c.verdict {
        Verdict::Contained => "contained",
        Verdict::StrictlyContainedDiagnostic => "strictly-contained-diagnostic",
        Verdict::NotContainedDiagnostic => "not-contained-diagnostic",
        Verdict::Inconclusive => "inconclusive",
    };
    report
        .checks
        .push(CheckResult::diagnostic("comparison", format!("{label} at K = {horizon}")).with_payload(&c));
    Ok(Output { report, tables: vec![] })
}

fn ostrowski_cmd(family: &str, r_min: f64, r_max: f64, count: usize, horizon: u64) -> blowdown::Result<Output> {
    let m = parse_family(family)?;
    let mut report = ReportEnvelope::new(
        "ostrowski",
        json!({ "family": m.spec(), "r_min": r_min, "r_max": r_max, "count": count, "K": horizon }),
    );
    let rows = phi_grid(&m, r_min, r_max, count)?;
    let mut identities = Vec::new();
    let mut worst: f64 = 0.0;
    let mut exact_ok = true;
    let mut saturated = 0;
    for k in 0..=horizon {
        match verify_phi_identity(&m, k) {
            Ok(id) => {
                worst = worst.max(id.delta_log.abs());
                exact_ok &= id.exact_equal != Some(false);
                identities.push(id);
            }
            Err(Error::Saturated(_)) => saturated += 1,
            Err(e) => return Err(e),
        }
    }
    let pass = saturated == 0 && exact_ok && worst <= 1e-12;
    report.checks.push(
        CheckResult::new(
            "phi-identity",
            pass,
            format!("k <= {horizon}: max |dlog| {worst:.3e}, exact mismatches {}, saturated {saturated}", !exact_ok as u8),
        )
        .with_payload(&identities),
    );
    #[derive(Serialize)]
    struct Row {
        r: f64,
        phi_log: f64,
        argmax: u64,
    }
    let table: Vec<Row> = rows
        .iter()
        .map(|p| Row { r: p.r, phi_log: p.phi_log, argmax: p.argmax })
        .collect();
    Ok(Output { report, tables: vec![("ostrowski".into(), csv_bytes(&table)?)] })
}

fn verify_bounds(a: &VerifyArgs) -> blowdown::Result<Output> {
    let mut report = ReportEnvelope::new("verify-bounds", serde_json::to_value(a)?);
    let seq = parse_family(&a.family)?;
    let terms = a.terms.unwrap_or_else(|| default_terms(a.dmax));
    let block_params = || -> blowdown::Result<Option<BlockParams>> {
        match (a.q, a.rho) {
            (Some(q), Some(rho)) => Ok(Some(BlockParams::new(q, rho)?)),
            (None, None) => Ok(None),
            _ => Err(Error::usage("--q and --rho go together")),
        }
    };
    let r = match a.target {
        Target::Cauchy => CheckResult::from_bound("cauchy", &cauchy_sweep(a.seed, a.samples, a.dmax)?),
        Target::Brick | Target::PolarBrick => {
            let params = match (a.q, a.m, a.rho) {
                (Some(q), Some(m), Some(rho)) => Some(blowdown::bricks::BrickParams::new(q, m, rho)?),
                (None, None, None) => None,
                _ => return Err(Error::usage("--q, --m and --rho go together")),
            };
            if a.target == Target::Brick {
                let p = params.unwrap_or(blowdown::bricks::BrickParams::new(2.0, 2.0, 0.5)?);
                let rep = blowdown::bricks::brick_remark_sweep(&p, a.seed, a.samples, a.dmax)?;
                CheckResult::from_bound("brick", &rep)
            } else {
                let c = a.c.unwrap_or(DEFAULT_POLAR_CONSTANT);
                CheckResult::from_bound("polar-brick", &polar_brick_sweep(params, a.seed, a.samples, a.dmax, c)?)
            }
        }
        Target::Base => {
            let base = BaseFunction::new(&seq, terms)?;
            let side = (a.samples as f64).sqrt().ceil().max(1.0) as usize;
            let upper = base_upper_check(&base, &sampling::square_grid(side, 2.0), a.dmax)?;
            let lower = base_lower_check(&base, a.dmax / 2)?;
            report.checks.push(
                CheckResult::new(
                    "base-lower",
                    lower.iter().all(|r| r.pass && r.sign_ok),
                    format!("|d^2n h(0)| - tail >= (2n)! M_2n / 4^n for n <= {}", a.dmax / 2),
                )
                .with_payload(&lower),
            );
            CheckResult::from_bound("base-upper", &upper)
        }
        Target::Block => {
            let base = BaseFunction::new(&seq, terms)?;
            let bp = block_params()?.unwrap_or(BlockParams::new(2.0, 0.5)?);
            CheckResult::from_bound("block", &block_upper_sweep(&base, &bp, a.seed, a.samples, a.dmax)?)
        }
        Target::PolarBlock => {
            let base = BaseFunction::new(&seq, terms)?;
            let c = a.c.unwrap_or(DEFAULT_BLOCK_POLAR_CONSTANT);
            let rep = polar_block_bound_check(&base, block_params()?, a.seed, a.samples, a.dmax, c)?;
            CheckResult::from_bound("polar-block", &rep)
        }
    };
    report.checks.push(r);
    Ok(Output { report, tables: vec![] })
}

fn construct_flat(family: &str, e: &str, lambda_max: u64) -> blowdown::Result<Output> {
    let seq = parse_family(family)?;
    let e_fn: EFunction = e.parse()?;
    let mut report = ReportEnvelope::new(
        "construct-flat",
        json!({ "family": seq.spec(), "E": e_fn.to_string(), "lambda_max": lambda_max }),
    );
    let g = build_gamma(&seq, e_fn, lambda_max, None)?;
    let summary = g.summary();
    let gaps = delta_gaps(&g)?;
    report.checks.push(CheckResult::new(
        "gamma-invariants",
        summary.sparsity && summary.q_exceeds_one,
        format!("Lambda = {:?}; sparsity {}, q > 1 {}", summary.lambda, summary.sparsity, summary.q_exceeds_one),
    ));
    report.checks.push(
        CheckResult::new(
            "delta-gaps",
            gaps.half_e_holds,
            format!(
                "delta >= E/2 for every stored index: {}; lambda_0 estimate {:?}",
                gaps.half_e_holds, gaps.lambda0_estimate
            ),
        )
        .with_payload(&gaps),
    );
    report.checks.push(CheckResult::diagnostic("gamma", "flat-construction data").with_payload(&summary));
    let json = serde_json::to_vec_pretty(&summary)?;
    Ok(Output { report, tables: vec![("gamma.json".into(), json)] })
}

fn certify(gamma: &Path, n: &str, lambda: Option<&[u64]>) -> blowdown::Result<Output> {
    let text = fs::read_to_string(gamma)?;
    let summary: GammaSummary = serde_json::from_str(&text)?;
    let g = summary.rebuild()?;
    let n_seq = parse_family(n)?;
    let mut report = ReportEnvelope::new(
        "certify",
        json!({ "family": g.seq.spec(), "E": g.e_fn.to_string(), "lambda_max": g.lambda_max, "N": n_seq.spec(), "lambda": lambda }),
    );
    let all = g.lambdas();
    let lambdas = lambda.unwrap_or(&all[..all.len() - 1]);
    let gaps = delta_gaps(&g)?;
    let cert = lower_bound_certificate(&g, &gaps, lambdas)?;
    report.checks.push(
        CheckResult::new(
            "lower-bound-certificate",
            cert.pass,
            format!(
                "lambda {:?}: |d^l F(x_l)| >= eps^l l! M_l^2 / 4^l with bracket: {}",
                lambdas, cert.pass
            ),
        )
        .with_payload(&cert),
    );
    let sharp = sharpness_certificate(&g, &n_seq, Some(lambdas))?;
    let status_detail = format!(
        "{:?} mode: r = [{}], fitted constant {:.6}",
        sharp.mode,
        sharp.rows.iter().map(|r| format!("{:.6}", r.ratio_root)).collect::<Vec<_>>().join(", "),
        sharp.fitted_constant
    );
    report
        .checks
        .push(CheckResult::new("sharpness", sharp.pass, status_detail).with_payload(&sharp));
    #[derive(Serialize)]
    struct Row {
        lambda: u64,
        lhs_log: f64,
        rhs_log: f64,
        ratio_root: f64,
    }
    let rows: Vec<Row> = sharp
        .rows
        .iter()
        .map(|r| Row { lambda: r.lambda, lhs_log: r.lhs_log, rhs_log: r.rhs_log, ratio_root: r.ratio_root })
        .collect();
    Ok(Output { report, tables: vec![("certify".into(), csv_bytes(&rows)?)] })
}

fn counterexample(pairs: usize, horizon: u64) -> blowdown::Result<Output> {
    let mut report = ReportEnvelope::new("counterexample", json!({ "pairs": pairs, "K": horizon }));
    let c = build_counterexample(pairs)?;
    report.checks.push(CheckResult::diagnostic("schedule", format!("{} entries", c.schedule.lambda.len())).with_payload(&c.schedule));
    let slow = slow_sequence_report(64);
    report.checks.push(
        CheckResult::diagnostic(
            "slow-sequence",
            format!(
                "v_(n+1)/v_n decreasing {}; v_2n/v_n increasing {}",
                slow.step_ratio_decreasing, slow.doubling_ratio_increasing
            ),
        )
        .with_payload(&slow),
    );
    let convex = c.verify_log_convex(horizon)?;
    report.checks.push(
        CheckResult::new(
            "log-convex",
            convex.pass,
            format!("{} decreases of a_k for k <= {horizon}", convex.violations),
        )
        .with_payload(&convex),
    );
    let closed = c.verify_diff_closed(horizon)?;
    report.checks.push(
        CheckResult::new("diff-closed", closed.pass, format!("max b_k = {:.6} at k = {}", closed.max_b, closed.argmax_b))
            .with_payload(&closed),
    );
    let quasi = c.verify_quasianalytic_diag(horizon)?;
    report.checks.push(
        CheckResult::new(
            "quasianalytic",
            quasi.pass,
            format!("gap series by pair: {:?}", quasi.gap_partial_sums_by_pair),
        )
        .with_payload(&quasi),
    );
    let gap = c.verify_strict_gap(horizon)?;
    report.checks.push(
        CheckResult::new(
            "strict-gap",
            gap.pass,
            format!("g = 1 first at {:?}; min g = {:.6} at k = {}", gap.first_unit, gap.min_g, gap.argmin_g),
        )
        .with_payload(&gap),
    );
    let rows = c.rows(horizon);
    Ok(Output { report, tables: vec![("counterexample".into(), csv_bytes(&rows)?)] })
}

fn selftest(only: Option<u32>) -> blowdown::Result<Output> {
    let mut report = ReportEnvelope::new("selftest", json!({ "criterion": only }));
    let list: Vec<_> = match only {
        Some(id) => vec![criterion(id).ok_or_else(|| Error::usage(format!("no criterion {id} (1..=11)")))?],
        None => CRITERIA.iter().collect(),
    };
    for c in list {
        let r = c.run();
        log::info!("criterion {} {}: {:?}", c.id, c.name, r.status);
        report.checks.push(r);
    }
    Ok(Output { report, tables: vec![] })
}

fn run(cli: &Cli) -> blowdown::Result<Output> {
    match &cli.command {
        Command::Analyze { family, horizon } => analyze(family, *horizon),
        Command::Compare { n, m, horizon } => compare_cmd(n, m, *horizon),
        Command::Ostrowski { family, r_min, r_max, count, horizon } => {
            ostrowski_cmd(family, *r_min, *r_max, *count, *horizon)
        }
        Command::VerifyBounds(a) => verify_bounds(a),
        Command::ConstructFlat { family, e, lambda_max } => construct_flat(family, e, *lambda_max),
        Command::Certify { gamma, n, lambda } => certify(gamma, n, lambda.as_deref()),
        Command::Counterexample { pairs, horizon } => counterexample(*pairs, *horizon),
        Command::Selftest { criterion } => selftest(*criterion),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze { .. } => "analyze",
        Command::Compare { .. } => "compare",
        Command::Ostrowski { .. } => "ostrowski",
        Command::VerifyBounds(_) => "verify-bounds",
        Command::ConstructFlat { .. } => "construct-flat",
        Command::Certify { .. } => "certify",
        Command::Counterexample { .. } => "counterexample",
        Command::Selftest { .. } => "selftest",
    }
}

fn emit(cli: &Cli, out: &Output) -> blowdown::Result<()> {
    let json = serde_json::to_string_pretty(&out.report)?;
    println!("{json}");
    if let Some(dir) = &cli.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.json", command_name(&cli.command))), format!("{json}\n"))?;
        for (stem, bytes) in &out.tables {
            let name = if stem.contains('.') { stem.clone() } else { format!("{stem}.csv") };
            fs::write(dir.join(name), bytes)?;
        }
    }
    for c in &out.report.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Diagnostic => "diag",
        };
        eprintln!("{status:>4}  {}: {}", c.name, c.detail);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut out) => {
            if cli.timing {
                out.report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
            }
            if let Err(e) = emit(&cli, &out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(out.report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Domain(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
