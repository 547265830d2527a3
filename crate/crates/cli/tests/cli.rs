use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn shapeflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapeflow"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

const ATOM: &str = r#"{"driver": {"pieces": [{"t_start": 0, "atoms": [{"theta": 0, "mu": 1}]}]},
  "window": {"m": 0, "n_psi": 8}, "sample_every": 50}"#;

const BALANCED: &str = r#"{"driver": {"pieces": [{"t_start": 0, "atoms": [
    {"theta": 0.0, "mu": 0.25}, {"theta": 1.5707963267948966, "mu": 0.25},
    {"theta": 3.141592653589793, "mu": 0.25}, {"theta": 4.71238898038469, "mu": 0.25}]}]},
  "horizon": 0.5, "step": 0.005, "order": 32, "window": {"m": 0, "n_psi": 4}}"#;

#[test]
fn identity_driver_reports_no_drift() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "id.json", r#"{"driver": {"pieces": [{"t_start": 0, "uniform": 1}]}, "seed": 4}"#);
    let out = shapeflow(tmp.path(), &["evolve", "--config", "id.json", "--out", "run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("run/conservation.json")).unwrap()).unwrap();
    for (_, d) in report["max_relative_drift"].as_object().unwrap() {
        assert!(d.as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn atom_driver_matches_implicit_solution() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "atom.json", ATOM);
    let out = shapeflow(tmp.path(), &["evolve", "--config", "atom.json", "--out", "run"]);
    assert!(out.status.success());
    let csv_text = fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    let errs = column(&csv_text, "implicit_err");
    assert_eq!(errs.len(), 21);
    assert!(errs.iter().all(|e| e.parse::<f64>().unwrap() < 1e-8));
    assert_eq!(column(&csv_text, "t")[14], "0.7");
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.json", "{\"driver\": ");
    let out = shapeflow(tmp.path(), &["evolve", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));

    write(tmp.path(), "mass.json", r#"{"driver": {"pieces": [{"t_start": 0, "atoms": [{"theta": 0, "mu": 0.5}]}]}}"#);
    assert_eq!(shapeflow(tmp.path(), &["evolve", "--config", "mass.json"]).status.code(), Some(2));
    assert_eq!(shapeflow(tmp.path(), &["kp"]).status.code(), Some(2));
}

#[test]
fn check_suites_pass() {
    let tmp = TempDir::new().unwrap();
    for suite in ["witt", "bracket", "basis", "quadrature"] {
        let out = shapeflow(tmp.path(), &["check", suite, "--parallel", "4"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
        let records: Value = serde_json::from_slice(&out.stdout).unwrap();
        let records = records.as_array().unwrap();
        assert!(!records.is_empty());
        assert!(records.iter().all(|r| r["passed"] == Value::Bool(true)));
    }
}

#[test]
fn reference_dump_lists_locations() {
    let tmp = TempDir::new().unwrap();
    let out = shapeflow(tmp.path(), &["--dump-paper-examples", "--parallel", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() > 100);
    assert!(text.lines().all(|l| l.contains("checks.rs:") && l.contains("PASS")));
}

#[test]
fn kp_with_zero_coefficients_has_zero_residual() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "kp.json",
        r#"{"f_source": {"coefficients": []}, "order": 8, "grid": {"t1": [0, 0.1], "t2": [0.05], "t3": [-0.02, 0.02]}}"#,
    );
    let out = shapeflow(tmp.path(), &["kp", "--config", "kp.json"]);
    assert!(out.status.success());
    let csv_text = fs::read_to_string(tmp.path().join("kp.csv")).unwrap();
    let res = column(&csv_text, "residual");
    assert_eq!(res.len(), 4);
    assert!(res.iter().all(|r| r == "0"));
}

#[test]
fn kp_acceptance_instance_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let c: Vec<String> = (1..=32).map(|k| format!("[{}, 0]", 0.5f64.powi(k) / k as f64)).collect();
    let cfg = format!(
        r#"{{"f_source": {{"coefficients": [{}]}}, "order": 32, "grid": {{"t1": [0.05], "t2": [0.03], "t3": [0.02]}}, "convergence": true}}"#,
        c.join(", ")
    );
    write(tmp.path(), "kp.json", &cfg);
    let first = shapeflow(tmp.path(), &["kp", "--config", "kp.json", "--out", "a", "--parallel", "2"]);
    assert!(first.status.success());
    shapeflow(tmp.path(), &["kp", "--config", "kp.json", "--out", "b"]);
    let a = fs::read_to_string(tmp.path().join("a/kp.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(tmp.path().join("b/kp.csv")).unwrap());
    assert!(column(&a, "residual")[0].parse::<f64>().unwrap() < 1e-6);
    assert!(column(&a, "tau_gap_2n")[0].parse::<f64>().unwrap() < 1e-8);
}

#[test]
fn snapshot_feeds_kp_tau_and_graph_dump() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "run.json", BALANCED);
    let out = shapeflow(tmp.path(), &["evolve", "--config", "run.json", "--out", "run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    fs::create_dir(tmp.path().join("cfg")).unwrap();
    write(
        &tmp.path().join("cfg"),
        "kp.json",
        r#"{"f_source": {"snapshot": {"path": "../run/trajectory.csv", "t": 0.5}}, "order": 32, "n": 2,
            "grid": {"t1": [0.0, 0.05], "t2": [0.03], "t3": [0.02]}}"#,
    );
    for cmd in ["kp", "tau", "graph-dump"] {
        let out = shapeflow(tmp.path(), &[cmd, "--config", "cfg/kp.json", "--out", "kp"]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let tau_csv = fs::read_to_string(tmp.path().join("kp/tau.csv")).unwrap();
    assert_eq!(tau_csv.lines().next().unwrap(), "t1,t2,t3,re_tau,im_tau,re_tau_2n,im_tau_2n,tau_gap_2n");
    let graph: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("kp/graph.json")).unwrap()).unwrap();
    assert_eq!(graph["n"], 2);
    assert_eq!(graph["basis"].as_array().unwrap().len(), 33);

    write(
        &tmp.path().join("cfg"),
        "missing.json",
        r#"{"f_source": {"snapshot": {"path": "../run/trajectory.csv", "t": 0.123}}}"#,
    );
    assert_eq!(shapeflow(tmp.path(), &["kp", "--config", "cfg/missing.json"]).status.code(), Some(2));
}

#[test]
fn insufficient_truncation_exits_3() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "atom.json", ATOM);
    assert!(shapeflow(tmp.path(), &["evolve", "--config", "atom.json", "--out", "run"]).status.success());
    write(
        tmp.path(),
        "kp.json",
        r#"{"f_source": {"snapshot": {"path": "run/trajectory.csv", "t": 0.5}}, "order": 8,
            "grid": {"t1": [0.05], "t2": [0.03], "t3": [0.02]}}"#,
    );
    assert_eq!(shapeflow(tmp.path(), &["kp", "--config", "kp.json"]).status.code(), Some(3));
}
