use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cbrs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbrs"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("cbrs runs")
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_GAA: &str = r#"{
    "scenario": {"tier": "gaa", "radius_km": 0.3, "source": {"synthetic": {"density_per_km2": 75}}},
    "solvers": [{"algorithm": "gmwis", "label": "mr", "alpha_bar": 1}, {"algorithm": "mra"}],
    "seeds": [0, 1]
}"#;

#[test]
fn gen_graph_solve_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), SMALL_GAA).unwrap();
    ok(cbrs(&["gen", "--config", "cfg.json", "--seed", "3", "--out", "scenario.json"], d));
    ok(cbrs(
        &["graph", "scenario.json", "--solver", "um", "--lambda", "1", "--out", "graph.json"],
        d,
    ));
    ok(cbrs(
        &["solve", "graph.json", "--solver", "um", "--lambda", "1", "--out", "sol.json"],
        d,
    ));
    let sol = json(&d.join("sol.json"));
    let selected = sol["selected"].as_array().unwrap();
    assert!(!selected.is_empty());
    assert!(sol["objective"].as_f64().unwrap() > 0.0);

    // printing to stdout gives the same solution
    let out = ok(cbrs(&["solve", "graph.json", "--solver", "um", "--lambda", "1"], d));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, sol);
}

#[test]
fn graph_from_config_matches_graph_from_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), SMALL_GAA).unwrap();
    ok(cbrs(&["gen", "--config", "cfg.json", "--seed", "1", "--out", "s.json"], d));
    ok(cbrs(&["graph", "s.json", "--seed", "1", "--out", "a.json"], d));
    ok(cbrs(&["graph", "--config", "cfg.json", "--seed", "1", "--out", "b.json"], d));
    assert_eq!(json(&d.join("a.json")), json(&d.join("b.json")));
}

#[test]
fn bench_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), SMALL_GAA).unwrap();
    ok(cbrs(&["bench", "--config", "cfg.json", "--seeds", "3", "--out", "r.csv"], d));
    let text = std::fs::read_to_string(d.join("r.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("seed,axis_value,solver"));
    // 3 seeds x 2 solvers plus one mean row per solver
    assert_eq!(lines.len(), 1 + 6 + 2);
    assert!(lines[7].starts_with("mean,"));
    // without --timing the runtime column stays empty
    assert!(lines[1..].iter().all(|l| l.ends_with(',')));

    let manifest = json(&d.join("r.manifest.json"));
    assert_eq!(manifest["config"]["seeds"], serde_json::json!([0, 1, 2]));
    assert!(manifest["wall_clock_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn bench_timing_fills_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), SMALL_GAA).unwrap();
    ok(cbrs(&["bench", "--config", "cfg.json", "--timing", "--out", "r.csv"], d));
    let text = std::fs::read_to_string(d.join("r.csv")).unwrap();
    let data: Vec<&str> = text.lines().skip(1).filter(|l| !l.starts_with("mean")).collect();
    assert!(data.iter().all(|l| !l.ends_with(',')));
}

#[test]
fn sweep_emits_one_block_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), SMALL_GAA).unwrap();
    ok(cbrs(
        &["sweep", "--config", "cfg.json", "--axis", "lambda", "--values", "0,2,4", "--out", "s.csv"],
        d,
    ));
    let text = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    // 2 seeds x 3 values x 2 solvers, then 3 x 2 means
    assert_eq!(rows.len(), 12 + 6);
    let mut values: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    values.dedup();
    assert!(values.len() >= 3);
    assert!(rows[12..].iter().all(|r| r[0] == "mean"));
}

#[test]
fn output_path_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = SMALL_GAA.replacen('{', r#"{"output": "from_cfg.csv","#, 1);
    std::fs::write(d.join("cfg.json"), cfg).unwrap();
    ok(cbrs(&["bench", "--config", "cfg.json"], d));
    assert!(d.join("from_cfg.csv").exists());
}

#[test]
fn errors_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), SMALL_GAA).unwrap();

    let missing_out = cbrs(&["bench", "--config", "cfg.json"], d);
    assert!(!missing_out.status.success());
    assert!(String::from_utf8_lossy(&missing_out.stderr).contains("no output path"));

    let missing_cfg = cbrs(&["bench", "--config", "nope.json", "--out", "x.csv"], d);
    assert!(!missing_cfg.status.success());
    assert!(String::from_utf8_lossy(&missing_cfg.stderr).starts_with("error:"));

    // npsmc has no GAA formulation
    let bad = r#"{"scenario": {"tier": "gaa"}, "solvers": [{"algorithm": "npsmc"}], "seeds": [0]}"#;
    std::fs::write(d.join("bad.json"), bad).unwrap();
    assert!(!cbrs(&["bench", "--config", "bad.json", "--out", "x.csv"], d).status.success());

    let bad_solver = cbrs(&["graph", "--solver", "simplex"], d);
    assert!(!bad_solver.status.success());
}
