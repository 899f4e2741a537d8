use std::path::Path;
use std::process::{Command, Output};

use almostrep::group::{cyclic_group, FiniteGroup};
use almostrep::rep::UnitaryRep;
use almostrep::report::read_csv;
use almostrep::spectral::GapReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_almostrep"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn almostrep")
}

fn z3_regular(dir: &Path) -> String {
    let g = FiniteGroup::generate(&cyclic_group(3).unwrap(), 16).unwrap();
    let path = dir.join("z3.json");
    UnitaryRep::regular(&g).write(&path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["defect", "gap", "sos-check", "hyperfinite", "intertwine", "connes", "cocycle", "sl2-scan"] {
        assert!(text.contains(sub), "missing {sub} in usage");
    }
}

#[test]
fn gap_on_z3_regular_passes() {
    let dir = tempfile::tempdir().unwrap();
    let rep = z3_regular(dir.path());
    let out = run(&["gap", "--rep", &rep, "--lambda", "3/2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<GapReport> = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].pass);
    assert_eq!(rows[0].lambda, 1.5);
    assert_eq!(rows[0].interval_weight, 0.0);
}

#[test]
fn gap_beyond_spectrum_fails_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let rep = z3_regular(dir.path());
    // the eigenvalue 3/2 sits inside [1/2, 3/2] when lambda = 2
    let out = run(&["gap", "--rep", &rep, "--lambda", "2", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reason=check-failed"));
}

#[test]
fn malformed_matrix_exits_two_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.json");
    std::fs::write(&bad, "{ \"rows\": 2, \"cols\": ").unwrap();
    let bad = bad.to_str().unwrap();
    let out = run(&["connes", "--t", bad, "--witness", bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(bad), "{err}");
    assert!(err.contains("reason=io"));
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["gap", "--rep", "/nonexistent/rep.json", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/rep.json"));
}

#[test]
fn scan_requires_seed() {
    let out = run(&["sl2-scan", "--p", "2", "--nmax", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reason=missing-seed"));
}

#[test]
fn scan_is_byte_identical() {
    let args = ["--seed", "7", "sl2-scan", "--p", "2", "--nmax", "5", "--no-timing"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cocycle_heisenberg_is_not_a_coboundary() {
    let out = run(&["--format", "text", "cocycle", "--group", "zn2:2", "--cocycle", "heisenberg:2", "--twisted"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("order=4"));
    assert!(text.contains("non_coboundary=true"));
    let defect: f64 = text.trim().rsplit("twisted_defect=").next().unwrap().parse().unwrap();
    assert!(defect < 1e-12);
}

#[test]
fn defect_reports_relators_and_max() {
    let dir = tempfile::tempdir().unwrap();
    let rep = z3_regular(dir.path());
    let out = run(&["defect", "--rep", &rep, "--relator", "g^3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,item,defect"));
    let value = |prefix: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no {prefix} row"));
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert!(value("relator,g g g,") < 1e-12);
    assert!(value("max,,") < 1e-12);
    assert_eq!(text.lines().filter(|l| l.starts_with("pair,")).count(), 9);
}

#[test]
fn out_flag_writes_file_and_input_is_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let rep = z3_regular(dir.path());
    let before = std::fs::read(&rep).unwrap();
    let report = dir.path().join("gap.csv");
    let out = run(&["--out", report.to_str().unwrap(), "gap", "--rep", &rep, "--lambda", "1.5"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&report).unwrap().starts_with("lambda,alpha,epsilon,weight,pass,C,Cprime\n"));
    assert_eq!(std::fs::read(&rep).unwrap(), before);
}
