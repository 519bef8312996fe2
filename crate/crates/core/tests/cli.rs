//! Binary-level contract: exit codes, report schema, CSV headers, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nwise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nwise"))
        .args(args)
        .env_remove(nwise::config::TOLERANCE_FILE_ENV)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{}-{name}", std::process::id()))
}

#[test]
fn thresholds() {
    for (set, expected) in [("paulis", 0.5774), ("clifford:2", std::f64::consts::FRAC_1_SQRT_2), ("gbit-fiducials", 0.5)] {
        let r = json(&nwise(&["jm-threshold", "--set", set]));
        assert!((r["results"]["eta_star"].as_f64().unwrap() - expected).abs() < 2e-3, "{set}");
        for key in ["command", "config", "results", "residuals", "wall_clock_ms"] {
            assert!(r.get(key).is_some(), "{key}");
        }
        assert_eq!(r["config"]["tolerances"]["eta"], 1e-3);
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["jm-threshold", "--set", "qutrits"][..],
        &["witness", "--n", "6"],
        &["witness", "--n", "3", "--eta", "1.5"],
        &["scan", "--set", "paulis", "--grid", "0.5,2"],
        &["scan", "--set", "gbit-fiducials", "--grid", "0.5", "--engines", "lhs"],
        &["frobnicate"],
    ] {
        assert_eq!(nwise(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn witness_report() {
    let r = json(&nwise(&["witness", "--n", "3", "--eta", "1"]));
    assert!((r["results"]["value"].as_f64().unwrap() - 4.0 * 3f64.sqrt()).abs() < 1e-9);
    assert_eq!(r["results"]["violation"], true);
    assert_eq!(r["results"]["bound_local"], 4.0);
    let r = json(&nwise(&["witness", "--n", "2", "--delta", "0.1,0.2"]));
    assert_eq!(r["results"]["delta_used"], serde_json::json!([0.1, 0.2]));
}

#[test]
fn scan_csv() {
    let out = nwise(&["scan", "--set", "paulis", "--grid", "0.5,0.55,0.6", "--engines", "jm,lhs", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("set,eta,engine,verdict,value,residual"));
    let verdicts: Vec<&str> = lines.map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(verdicts, ["feasible", "feasible", "feasible", "feasible", "infeasible", "infeasible"]);

    let out = nwise(&["scan", "--set", "paulis", "--grid", "", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "set,eta,engine,verdict,value,residual\n");
}

#[test]
fn selftest_is_deterministic_and_fault_injection_fails() {
    let a = nwise(&["selftest", "--seed", "3"]);
    let b = nwise(&["selftest", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let bad = nwise(&["selftest", "--tol", "1e-30"]);
    assert_eq!(bad.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&bad.stdout).unwrap();
    let failures = r["results"]["failures"].as_array().unwrap();
    assert!(failures.iter().any(|f| f == "eig_reconstruction"));
}

#[test]
fn assemblage_export_import() {
    let path = scratch("asm.txt");
    let p = path.to_str().unwrap();
    let r = json(&nwise(&["assemblage", "--set", "paulis", "--eta", "0.5", "--export", p]));
    assert_eq!(r["results"]["lhs_status"], "feasible");
    assert_eq!(r["results"]["simplex_embeddable"], "embeddable");
    let r = json(&nwise(&["assemblage", "--input", p]));
    assert_eq!(r["results"]["lhs_status"], "feasible");
    assert_eq!(r["results"]["n"], 3);

    std::fs::write(&path, "n 1\ndim_b 1\nsigma 0 +\n0.4 0\nsigma 0 -\n0.7 0\n").unwrap();
    assert_eq!(nwise(&["assemblage", "--input", p]).status.code(), Some(2));
    let r = json(&nwise(&["assemblage", "--set", "paulis", "--eta", "1"]));
    assert_eq!(r["results"]["simplex_embeddable"], "not_embeddable");
}

#[test]
fn gbit_demo_with_fragment_file() {
    let r = json(&nwise(&["gbit-demo"]));
    assert_eq!(r["results"]["sharp_jointly_measurable"], false);
    assert_eq!(r["results"]["below_quantum_pair"], true);

    let path = scratch("bit.txt");
    std::fs::write(&path, "vec_dim 2\nunit 1 1\nstate 1 0\nstate 0 1\neffect 1 0\neffect 0 1\nmeasurement 0 1\n").unwrap();
    let r = json(&nwise(&["gbit-demo", "--fragment", path.to_str().unwrap()]));
    assert_eq!(r["results"]["sharp_jointly_measurable"], true);
    assert_eq!(r["results"]["eta_star"], 1.0);
}

#[test]
fn tolerance_file_and_out_flag() {
    let tol = scratch("tol.toml");
    std::fs::write(&tol, "eta = 0.01\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nwise"))
        .args(["jm-threshold", "--set", "clifford:2"])
        .env(nwise::config::TOLERANCE_FILE_ENV, &tol)
        .output()
        .unwrap();
    let r = json(&out);
    assert_eq!(r["config"]["tolerances"]["eta"], 0.01);
    assert!(r["residuals"]["bracket_width"].as_f64().unwrap() <= 0.01);

    std::fs::write(&tol, "no_such_field = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nwise"))
        .args(["witness", "--n", "2"])
        .env(nwise::config::TOLERANCE_FILE_ENV, &tol)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let report = scratch("report.json");
    let out = nwise(&["witness", "--n", "2", "--out", report.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["command"], "witness");
}
