//! Machine-readable results: bound sweeps, check outcomes and the report envelope.

use serde::Serialize;

use crate::numerics::MultiIndex;

/// Outcome of a single inequality at one point and one multiindex.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSample {
    /// Evaluation point (Cartesian `x` or polar `(r, θ)`).
    pub point: [f64; 2],
    /// Extra parameters of the sample (e.g. `q, m, ρ`), empty when fixed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    pub alpha: MultiIndex,
    /// `ln |left side|`.
    pub lhs_log: f64,
    /// `ln right side`.
    pub rhs_log: f64,
    /// `rhs_log − lhs_log`; nonnegative when the bound holds.
    pub margin_log: f64,
    pub pass: bool,
}

/// Outcome of a bound-certification sweep.
///
/// `entries` keeps the worst multiindex per sample point.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    /// True when pass/fail was decided in exact rational arithmetic.
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub max_order: usize,
    pub points: usize,
    pub checks: usize,
    pub failures: usize,
    pub worst: Option<BoundSample>,
    /// Smallest constant of the bound's shape that fits every checked sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_constant: Option<f64>,
    pub entries: Vec<BoundSample>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, exact: bool, max_order: usize) -> Self {
        BoundReport {
            name: name.into(),
            exact,
            constant: None,
            seed: None,
            max_order,
            points: 0,
            checks: 0,
            failures: 0,
            worst: None,
            empirical_constant: None,
            entries: Vec::new(),
        }
    }

    /// Records all checks at one point; keeps the worst as the point's entry.
    pub fn push_point(&mut self, samples: Vec<BoundSample>) {
        self.points += 1;
        let mut worst: Option<BoundSample> = None;
        for s in samples {
            self.checks += 1;
            if !s.pass {
                self.failures += 1;
            }
            let replace = match &worst {
                None => true,
                Some(w) => (!s.pass && w.pass) || (s.pass == w.pass && s.margin_log < w.margin_log),
            };
            if replace {
                worst = Some(s);
            }
        }
        if let Some(w) = worst {
            let replace = match &self.worst {
                None => true,
                Some(g) => (!w.pass && g.pass) || (w.pass == g.pass && w.margin_log < g.margin_log),
            };
            if replace {
                self.worst = Some(w.clone());
            }
            self.entries.push(w);
        }
    }

    /// Folds a per-point constant into the running maximum.
    pub fn observe_constant(&mut self, c: f64) {
        self.empirical_constant = Some(match self.empirical_constant {
            Some(old) => old.max(c),
            None => c,
        });
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    pub fn worst_margin_log(&self) -> f64 {
        self.worst.as_ref().map_or(f64::INFINITY, |w| w.margin_log)
    }

    /// Merges per-point reports produced in parallel, in order.
    pub fn merge(name: impl Into<String>, exact: bool, max_order: usize, parts: Vec<Vec<BoundSample>>) -> Self {
        let mut report = BoundReport::new(name, exact, max_order);
        for p in parts {
            report.push_point(p);
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Diagnostic,
}

/// One named check with a JSON payload.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub payload: serde_json::Value,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            detail: detail.into(),
            payload: serde_json::Value::Null,
        }
    }

    pub fn diagnostic(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: Status::Diagnostic,
            detail: detail.into(),
            payload: serde_json::Value::Null,
        }
    }

    pub fn with_payload<T: Serialize>(mut self, payload: &T) -> Self {
        self.payload = serde_json::to_value(payload).unwrap_or(serde_json::Value::Null);
        self
    }

    pub fn from_bound(name: impl Into<String>, report: &BoundReport) -> Self {
        let detail = format!(
            "{} checks at {} points, {} failures, worst margin (log) {:.6}",
            report.checks,
            report.points,
            report.failures,
            report.worst_margin_log()
        );
        CheckResult::new(name, report.passed(), detail).with_payload(report)
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Top-level JSON document written by every CLI command.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    pub checks: Vec<CheckResult>,
}

impl ReportEnvelope {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        ReportEnvelope {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            wall_clock_seconds: None,
            checks: Vec::new(),
        }
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(CheckResult::failed)
    }

    /// 0 when no check failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.any_failed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(margin: f64) -> BoundSample {
        BoundSample {
            point: [0.0, 0.0],
            params: vec![],
            alpha: (0, 0),
            lhs_log: 0.0,
            rhs_log: margin,
            margin_log: margin,
            pass: margin >= 0.0,
        }
    }

    #[test]
    fn worst_tracking() {
        let mut r = BoundReport::new("t", true, 0);
        r.push_point(vec![sample(3.0), sample(1.0)]);
        r.push_point(vec![sample(-0.5), sample(2.0)]);
        assert_eq!(r.checks, 4);
        assert_eq!(r.failures, 1);
        assert_eq!(r.entries.len(), 2);
        assert_eq!(r.worst_margin_log(), -0.5);
        assert!(!r.passed());
    }

    #[test]
    fn envelope_exit_code() {
        let mut e = ReportEnvelope::new("x", serde_json::Value::Null);
        e.checks.push(CheckResult::new("a", true, ""));
        e.checks.push(CheckResult::diagnostic("b", ""));
        assert_eq!(e.exit_code(), 0);
        e.checks.push(CheckResult::new("c", false, ""));
        assert_eq!(e.exit_code(), 1);
    }
}
