//! Acceptance run with its own harness so every criterion line is printed:
//! `criterion <id> <name>: PASS|FAIL (<elapsed>s / <budget>s) [<tolerance>] <detail>`.
//!
//! Criteria run one at a time so their wall-clock budgets are measured without
//! contention from each other. An optional argument restricts the run to the
//! criteria whose id or name contains it.

use std::process::ExitCode;

use blowdown::selftest::{criterion, CRITERIA, FD_TOLERANCE, PHI_LOG_TOLERANCE};

fn pinned() -> bool {
    let budgets: Vec<u64> = (1..=11).map(|i| criterion(i).map_or(0, |c| c.budget_secs)).collect();
    FD_TOLERANCE == 1e-6 && PHI_LOG_TOLERANCE == 1e-12 && budgets == [1, 10, 5, 30, 60, 30, 60, 60, 10, 30, 5]
}

fn main() -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let ok = pinned();
    println!("tolerances pinned: {}", if ok { "PASS" } else { "FAIL" });
    let mut failed = usize::from(!ok);
    let mut ran = 0;
    for c in &CRITERIA {
        if let Some(f) = &filter {
            if !c.name.contains(f.as_str()) && c.id.to_string() != *f {
                continue;
            }
        }
        ran += 1;
        let (result, elapsed) = c.run_timed();
        println!(
            "criterion {:>2} {}: {} ({:.2}s / {}s) [{}] {}",
            c.id,
            c.name,
            if result.failed() { "FAIL" } else { "PASS" },
            elapsed.as_secs_f64(),
            c.budget_secs,
            c.tolerance,
            result.detail
        );
        failed += usize::from(result.failed());
    }
    println!("acceptance: {} criteria run, {failed} failed", ran);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
