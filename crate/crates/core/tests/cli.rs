use std::path::Path;
use std::process::{Command, Output};

use poisson_vqa::opalg::OperatorSum;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poisson-vqa"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn decompose_a_has_2m_plus_1_terms() {
    let o = run(&["decompose", "--matrix", "A", "--m", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sum = OperatorSum::from_json(&stdout(&o)).unwrap();
    assert_eq!(sum.len(), 7);
    assert_eq!(sum.qubits, 3);
}

#[test]
fn decompose_a_squared_verifies_exactly() {
    let o = run(&["decompose", "--matrix", "A2", "--m", "2", "--verify"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("verification residual: 0"), "{}", stderr(&o));
    assert_eq!(OperatorSum::from_json(&stdout(&o)).unwrap().len(), 9);
}

#[test]
fn decompose_tridiag_specializes_to_a() {
    let t = run(&["decompose", "--matrix", "tridiag", "--bands", "-1,2,-1", "--m", "2"]);
    let a = run(&["decompose", "--matrix", "A", "--m", "2"]);
    assert!(t.status.success() && a.status.success());
    assert_eq!(stdout(&t), stdout(&a));
}

#[test]
fn decompose_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = run(&["decompose", "--matrix", "B", "--m", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let sum = OperatorSum::from_json(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(sum.len(), 15);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["decompose", "--matrix", "Q", "--m", "2"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--matrix", "A", "--m", "0"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--matrix", "pentadiag", "--m", "1"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--matrix", "tridiag", "--bands", "1,2", "--m", "2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"problem": {"m": 2}, "typo": 1}"#);
    assert_eq!(run(&["solve", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), r#"{"problem": {"d": 2, "m": 2}}"#);
    let o = run(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d = 1"));
}

#[test]
fn capacity_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"problem": {"d": 2, "m": 7}}"#);
    let o = run(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("capacity"));
}

#[test]
fn solve_one_qubit_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"problem": {"m": 1, "rhs": "x"}, "ansatz": {"layers": 1}, "seed": 3}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    // A⁻¹ (1/3, 2/3) ∝ (4, 5)
    let state = record["run"]["state"].as_array().unwrap();
    let amp = |k: usize| (state[k][0].as_f64().unwrap(), state[k][1].as_f64().unwrap());
    let (a0, a1) = (amp(0), amp(1));
    let s = 41f64.sqrt();
    let overlap = ((4.0 * a0.0 + 5.0 * a1.0) / s).hypot((4.0 * a0.1 + 5.0 * a1.1) / s);
    assert!(overlap > 0.999, "{overlap}");
    assert_eq!(record["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(record["provenance"]["seeds"][0], 3);
    assert!(out.join("trace.csv").exists() && out.join("timing.json").exists());
    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("# poisson-vqa "));
    assert!(csv.contains("iteration,cost,best_cost,grad_norm,fidelity\n"));
}

#[test]
fn solve_two_qubits_reaches_target_fidelity() {
    let o = run(&["solve", "--m", "2", "--layers", "2", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let record: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(record["run"]["fidelity"].as_f64().unwrap() >= 0.99);
}

fn read_all(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect()
}

#[test]
fn solve_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["solve", "--m", "2", "--layers", "1", "--seed", "9", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let files = ["run.json", "trace.csv"];
    assert_eq!(read_all(&a, &files), read_all(&b, &files));
}

#[test]
fn shots_backend_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"problem": {"m": 1}, "ansatz": {"layers": 1}, "optimizer": {"restarts": 2, "max_iterations": 3}}"#);
    let runs: Vec<String> = (0..2)
        .map(|_| {
            let o = run(&["solve", "--config", &cfg, "--shots", "300", "--seed", "5", "--jobs", "2"]);
            assert!(o.status.success(), "{}", stderr(&o));
            stdout(&o)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].contains("\"kind\": \"shots\""));
}

#[test]
fn sweep_writes_sorted_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"sweep": {"m": [3, 2], "p_max": 6, "cost_target": 1e-3}, "optimizer": {"restarts": 3}}"#,
    );
    let out = dir.path().join("sweep");
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), summary["rows"].as_array().unwrap().len());
    let keys: Vec<(usize, usize)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted);
    for ml in summary["minimal_layers"].as_array().unwrap() {
        assert!(ml["p"].as_u64().is_some(), "m={} missed the target", ml["m"]);
        assert!(ml["fidelity"].as_f64().unwrap() >= 0.99);
        assert!(ml["cost"].as_f64().unwrap() <= 1e-3);
    }
    assert!(stdout(&o).contains("m=2 minimal p="));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    assert!(dir.path().join("verify.json").exists());
}
