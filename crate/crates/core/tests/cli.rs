//! End-to-end tests of the `blowdown` binary: exit codes, CSV headers and
//! golden reports. Set `BLOWDOWN_BLESS=1` to rewrite the golden files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_blowdown"));
    c.env_remove("BLOWDOWN_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("blowdown-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn golden(name: &str, actual: &[u8]) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("BLOWDOWN_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert!(expected == actual, "{name} differs from its golden file");
}

#[test]
fn compare_is_golden() {
    let out = run(&["compare", "--N", "analytic", "--M", "gevrey:1", "--K", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("strictly-contained-diagnostic"));
    golden("compare_analytic_gevrey1.json", &out.stdout);
}

#[test]
fn analyze_gevrey() {
    let out = run(&["analyze", "--family", "gevrey:1", "--K", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    let find = |n: &str| checks.iter().find(|c| c["name"] == n).unwrap().clone();
    assert_eq!(find("log-convexity")["status"], "pass");
    assert!(find("quasianalyticity")["detail"].as_str().unwrap().starts_with("converging-like"));
    assert!(v.get("wall_clock_seconds").is_none());
    golden("analyze_gevrey1.json", &out.stdout);
}

#[test]
fn reports_are_byte_stable() {
    let args = ["verify-bounds", "--target", "polar-brick", "--samples", "20", "--dmax", "4"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let timed = run(&["--timing", "compare", "--N", "analytic", "--M", "gevrey:1"]);
    let v: serde_json::Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(v["wall_clock_seconds"].is_number());
}

#[test]
fn ostrowski_csv_header_and_golden() {
    let dir = scratch("ostrowski");
    let out = bin()
        .env("BLOWDOWN_OUT_DIR", &dir)
        .args(["ostrowski", "--family", "gevrey:1", "--count", "12"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read(dir.join("ostrowski.csv")).unwrap();
    assert!(csv.starts_with(b"r,phi_log,argmax\n"));
    golden("ostrowski_gevrey1.csv", &csv);
    assert_eq!(fs::read(dir.join("ostrowski.json")).unwrap(), out.stdout);
}

#[test]
fn flat_round_trip() {
    let dir = scratch("flat");
    let d = dir.to_str().unwrap();
    let out = run(&["--out-dir", d, "construct-flat", "--family", "gevrey:1", "--E", "sqrt", "--lambda-max", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let gamma: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("gamma.json")).unwrap()).unwrap();
    assert_eq!(gamma["lambda"], serde_json::json!([2, 12, 52]));
    let gamma_path = dir.join("gamma.json");
    let out = run(&["--out-dir", d, "certify", "--gamma", gamma_path.to_str().unwrap(), "--N", "gevrey:1.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("certify.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,lhs_log,rhs_log,ratio_root"));
    assert_eq!(lines.count(), 2);
    // N far above the doubled scale is refused
    let out = run(&["certify", "--gamma", gamma_path.to_str().unwrap(), "--N", "gevrey:3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn counterexample_csv_and_exit_code() {
    let dir = scratch("counterexample");
    let out = run(&["--out-dir", dir.to_str().unwrap(), "counterexample", "--pairs", "3", "--K", "100"]);
    // the log-convexity check fails for this sequence
    assert_eq!(out.status.code(), Some(1));
    let csv = fs::read_to_string(dir.join("counterexample.csv")).unwrap();
    assert!(csv.starts_with("k,a_k,b_k,g_k\n"));
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["analyze", "--family", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["compare", "--N", "gevrey:1", "--M", "gevrey:1", "--K", "2"]).status.code(), Some(2));
    assert_eq!(run(&["construct-flat", "--family", "gevrey:1", "--E", "cube"]).status.code(), Some(2));
    assert_eq!(run(&["selftest", "--criterion", "99"]).status.code(), Some(2));
}

#[test]
fn construction_errors_exit_1() {
    let out = run(&["construct-flat", "--family", "analytic"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("construction failed"));
}

#[test]
fn selftest_single_criterion() {
    let out = run(&["selftest", "--criterion", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["checks"][0]["name"], "weight-invariants");
    assert_eq!(v["checks"][0]["status"], "pass");
}
