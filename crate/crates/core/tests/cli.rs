use std::path::Path;
use std::process::{Command, Output};

use expweight_core::harness::{RowKind, VerifyReport};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expweight")).args(args).output().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn mrs_numbers_for_gaussian_weight() {
    let out = run(&["mrs", "--weight", "freud:2", "--x", "1,4,9"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 3);
    for (row, exact) in rows.iter().zip([1.0, 2.0, 3.0]) {
        assert!((row[1] - exact).abs() < 1e-9 * exact, "{row:?}");
        assert!((row[2] - 2.0).abs() < 1e-9);
    }
}

#[test]
fn recurrence_for_gaussian_weight() {
    let out = run(&["recurrence", "--weight", "freud:2", "--n", "10"]);
    assert_eq!(out.status.code(), Some(0));
    for row in csv_rows(&String::from_utf8(out.stdout).unwrap()) {
        let k = row[0];
        if k >= 1.0 {
            assert!((row[1] - k.sqrt() / 2.0).abs() < 1e-10, "{row:?}");
        }
    }
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(run(&["verify", "--nmax", "99"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--experiment", "theorem"]).status.code(), Some(2));
    assert_eq!(run(&["mrs", "--weight", "gauss"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn failing_group_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    std::fs::write(&cfg, r#"{"stability": 1.0, "n_max": 6}"#).unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

fn verify_into(dir: &Path) -> VerifyReport {
    let out = Command::new(env!("CARGO_BIN_EXE_expweight"))
        .args(["verify", "--experiment", "simultaneous,tail_operator,mrs_growth", "--nmax", "8", "--out"])
        .arg(dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    VerifyReport::load(&dir.join("summary.json")).unwrap()
}

#[test]
fn verify_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let rep = verify_into(dir.path());
    rep.check_consistency().unwrap();
    assert!(rep.passed());
    for kind in [RowKind::Simultaneous, RowKind::TailDerivative, RowKind::MrsGrowth] {
        assert!(rep.rows_of(kind).next().is_some(), "{kind:?}");
    }
    for f in ["simultaneous.csv", "summary.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    assert!(std::fs::read_dir(dir.path().join("plots")).unwrap().count() > 0);
}
