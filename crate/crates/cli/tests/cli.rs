use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiaquant"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn spectrum_of_one_qubit_matches_closed_form() {
    let f = fixture("one_qubit.asat");
    let out = run(&["spectrum", f.to_str().unwrap(), "--grid", "101"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,E0,E1"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let root = (1.0 - 2.0 * v[0] + 2.0 * v[0] * v[0]).sqrt();
        assert!((v[1] - 0.5 * (1.0 - root)).abs() < 1e-12);
        assert!((v[2] - 0.5 * (1.0 + root)).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 101);
}

#[test]
fn three_bit_spectrum_keeps_ground_level_isolated() {
    let f = fixture("three_bit.asat");
    let out = run(&["spectrum", f.to_str().unwrap(), "--grid", "201"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("s,E0,E1,E2,E3,E4,E5,E6,E7\n"));
    let min_gap = text
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            v[2] - v[1]
        })
        .fold(f64::INFINITY, f64::min);
    assert!(min_gap > 0.1, "{min_gap}");
}

#[test]
fn ring_gap_is_analytic() {
    let out = run(&["gap", "--family", "ring", "--n", "100"]);
    let v = json(&out);
    assert_eq!(v["method"], "momentum-blocks");
    let g = v["g_min"].as_f64().unwrap();
    let target = 4.0 * std::f64::consts::PI / 300.0;
    assert!((g - target).abs() / target < 0.02, "{g}");
}

#[test]
fn grover_gap_uses_the_reduced_matrix() {
    let out = run(&["gap", "--family", "grover", "--n", "30"]);
    let v = json(&out);
    assert_eq!(v["method"], "reduced");
    let g = v["g_min"].as_f64().unwrap() * 2f64.powi(15);
    assert!((1.7..2.2).contains(&g), "{g}");
    let secular = v["secular"]["exact_gap"].as_f64().unwrap() * 2f64.powi(15);
    assert!((secular - g).abs() / g < 0.05);
    assert_eq!(v["settings"]["safety"], 10.0);
    assert_eq!(v["settings"]["threshold_default"], 0.99);
}

#[test]
fn instance_gap_with_estimate() {
    let f = fixture("three_bit.asat");
    let v = json(&run(&["gap", f.to_str().unwrap(), "--estimate"]));
    assert_eq!(v["method"], "full-space");
    let est = &v["estimate"];
    let scale = est["time_scale"].as_f64().unwrap();
    assert!(scale > 0.0);
    assert!((est["suggested_T"].as_f64().unwrap() - 10.0 * scale).abs() < 1e-9 * scale);
}

#[test]
fn evolve_finds_the_solution() {
    let f = fixture("three_bit.asat");
    let v = json(&run(&["evolve", f.to_str().unwrap(), "--T", "100", "--shots", "500"]));
    assert_eq!(v["ground_states"], serde_json::json!(["011"]));
    assert_eq!(v["success"], true);
    let top = &v["samples"][0];
    assert_eq!(top["assignment"], "011");
    assert_eq!(top["energy"], 0);
    assert!(top["count"].as_u64().unwrap() > 480);
}

#[test]
fn evolve_on_unsatisfiable_instance_minimizes_violations() {
    let f = fixture("contradiction2.asat");
    let v = json(&run(&["evolve", f.to_str().unwrap(), "--T", "100", "--shots", "400"]));
    assert_eq!(v["unsatisfiable"], true);
    assert_eq!(v["ground_states"], serde_json::json!(["10", "11"]));
    let low: u64 = v["samples"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["energy"] == 1)
        .map(|s| s["count"].as_u64().unwrap())
        .sum();
    assert!(low >= 390, "{low}");
}

#[test]
fn zero_time_samples_are_uniform() {
    let f = fixture("three_bit.asat");
    let v = json(&run(&["evolve", f.to_str().unwrap(), "--T", "0", "--shots", "8000"]));
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 8);
    for s in samples {
        let c = s["count"].as_u64().unwrap() as f64;
        assert!((c - 1000.0).abs() < 150.0, "{c}");
    }
}

#[test]
fn evolve_is_reproducible() {
    let f = fixture("ring6.asat");
    let args = ["evolve", f.to_str().unwrap(), "--T", "5", "--seed", "7"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn trotter_writes_gates_and_reports_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let gates = dir.path().join("gates.txt");
    let report = dir.path().join("report.json");
    let f = fixture("three_bit.asat");
    let out = run(&[
        "trotter",
        f.to_str().unwrap(),
        "--T",
        "20",
        "--epsilon",
        "0.01",
        "--execute",
        "-o",
        gates.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&gates).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header[0], "trotter");
    let (n, m, big_m, k): (usize, usize, usize, usize) = (
        header[1].parse().unwrap(),
        header[2].parse().unwrap(),
        header[3].parse().unwrap(),
        header[4].parse().unwrap(),
    );
    assert_eq!((n, m), (3, 3));
    assert_eq!(text.lines().count() - 1, big_m * k * (n + m));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v["fidelity"].as_f64().unwrap() >= 0.999);
}

#[test]
fn scaling_emits_csv_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("fit.json");
    let out = run(&[
        "scaling",
        "--family",
        "grover",
        "--n-range",
        "8..16..4",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,g_min,log_n,log_g\n"));
    assert_eq!(text.lines().count(), 4);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["n_values"], serde_json::json!([8, 12, 16]));
    assert_eq!(v["prefers_exponential"], true);
}

#[test]
fn solve_reports_ground_truth() {
    let f = fixture("disagree2.asat");
    let v = json(&run(&["solve", f.to_str().unwrap()]));
    assert_eq!(v["satisfiable"], true);
    assert_eq!(v["minimizers"], serde_json::json!(["01", "10"]));
}

#[test]
fn config_file_supplies_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"instance": {:?}, "grid": 11, "levels": 1}}"#,
            fixture("three_bit.asat").to_str().unwrap()
        ),
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("s,E0\n"));

    let out = run(&["--config", cfg.to_str().unwrap(), "spectrum", "--levels", "3"]);
    assert!(stdout(&out).starts_with("s,E0,E1,E2\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["evolve"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.asat");
    std::fs::write(&bad, "p asat 2 1\nagree 1 3\n").unwrap();
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "solve"]).status.code(), Some(3));

    let f = fixture("ring6.asat");
    assert_eq!(run(&["--cap", "4", "evolve", f.to_str().unwrap(), "--T", "1"]).status.code(), Some(4));

    let f = fixture("three_bit.asat");
    let out = run(&["evolve", f.to_str().unwrap(), "--T", "1", "--dt", "0.5"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn thread_cap_is_honored_and_validated() {
    let f = fixture("three_bit.asat");
    let path = f.to_str().unwrap();
    let base = run(&["spectrum", path, "--grid", "50"]);
    let capped = Command::new(env!("CARGO_BIN_EXE_adiaquant"))
        .args(["spectrum", path, "--grid", "50"])
        .env("ADIAQUANT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(base.stdout, capped.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_adiaquant"))
        .args(["solve", path])
        .env("ADIAQUANT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
