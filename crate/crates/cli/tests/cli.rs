//! End-to-end checks of the `gfsim` binary: identical inputs through the CLI
//! and through the library must produce identical outputs.

use std::path::Path;
use std::process::{Command, Output};

fn gfsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON record")
}

#[test]
fn analyze_prints_the_closed_form_value() {
    let out = gfsim(&[
        "analyze",
        "--lambda",
        "0.5",
        "--colweight",
        "2",
        "--ratio",
        "0.5",
    ]);
    let record = stdout_json(&out);
    assert_eq!(record["rfa_theory"].as_f64().unwrap(), 0.765625);
    assert!((record["g_upper_bound"].as_f64().unwrap() + 0.25).abs() < 1e-12);
}

#[test]
fn analyze_reports_detection_cost_when_asked() {
    let out = gfsim(&[
        "analyze",
        "--lambda",
        "0.1",
        "--colweight",
        "2",
        "--ratio",
        "0.5",
        "--packet-len",
        "60",
        "--psk",
        "2",
        "--slots",
        "400",
    ]);
    let record = stdout_json(&out);
    assert!((record["complexity_approx"].as_f64().unwrap() - 43_200.0).abs() < 1e-6);
}

#[test]
fn optimize_matches_the_library() {
    let out = gfsim(&["optimize", "--tau", "1"]);
    let record = stdout_json(&out);
    let r_star = record["r_star"].as_f64().unwrap();
    let expected = gfsim_core::theory::optimize_r(1.0_f64, 2).unwrap();
    assert_eq!(r_star, expected);
    assert!((r_star - 0.5).abs() <= 0.01);
}

#[test]
fn construct_census_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.mat");
    let out = gfsim(&[
        "construct",
        "--rows",
        "40",
        "--cols",
        "80",
        "--colweight",
        "2",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let matrix = gfsim_core::seqmat::read_matrix(&path).unwrap();
    assert!(gfsim_core::seqmat::validate_regular(&matrix, 2));

    let census = stdout_json(&gfsim(&["census", "--matrix", path.to_str().unwrap()]));
    let expected =
        serde_json::to_value(gfsim_core::seqmat::cycle_census(&matrix)).unwrap();
    assert_eq!(census, expected);
}

#[test]
fn invalid_dimensions_exit_with_usage_code() {
    let out = gfsim(&[
        "construct",
        "--rows",
        "4",
        "--cols",
        "3",
        "--colweight",
        "2",
        "--out",
        "/tmp/unused.mat",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn missing_required_flags_exit_with_usage_code() {
    let out = gfsim(&["construct", "--rows", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_code_one() {
    let out = gfsim(&["census", "--matrix", "/nonexistent/matrix.mat"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/matrix.mat"));
}

#[test]
fn simulate_runs_a_single_point_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let csv_path = dir.path().join("out.csv");
    std::fs::write(
        &cfg_path,
        r#"{
            "users": 40, "slots": 20, "col_weight": 2, "packet_len": 8,
            "psk_order": 2, "lambdas": [0.1], "snrs_db": [10.0],
            "trials": 10, "seed": 5, "matrix": {"construct": {"seed": 0}},
            "t_mpa": 3, "t_bp": 3, "t_outer": 2
        }"#,
    )
    .unwrap();
    let out = gfsim(&[
        "simulate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    let record = stdout_json(&out);
    assert_eq!(record["lambda"].as_f64().unwrap(), 0.1);
    assert_eq!(record["trials"].as_u64().unwrap(), 10);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("lambda,snr_db,trials,"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn sweep_is_reproducible_and_seed_override_changes_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "users": 40, "slots": 20, "col_weight": 2, "packet_len": 6,
            "psk_order": 2, "lambdas": [0.1, 0.2], "snrs_db": [8.0],
            "trials": 8, "seed": 5, "matrix": {"construct": {"seed": 0}},
            "t_mpa": 3, "t_bp": 3, "t_outer": 2
        }"#,
    )
    .unwrap();
    let run = |csv: &Path, seed: Option<&str>| {
        let csv_s = csv.to_str().unwrap().to_owned();
        let mut args = vec![
            "sweep".to_owned(),
            "--config".to_owned(),
            cfg_path.to_str().unwrap().to_owned(),
            "--out".to_owned(),
            csv_s,
        ];
        if let Some(s) = seed {
            args.push("--seed".to_owned());
            args.push(s.to_owned());
        }
        let arg_refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let out = gfsim(&arg_refs);
        assert!(out.status.success());
        std::fs::read(csv).unwrap()
    };
    let a = run(&dir.path().join("a.csv"), None);
    let b = run(&dir.path().join("b.csv"), None);
    assert_eq!(a, b);
    let c = run(&dir.path().join("c.csv"), Some("6"));
    assert_ne!(a, c);
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "users": 40, "slots": 20, "col_weight": 2, "packet_len": 6,
            "psk_order": 2, "lambdas": [0.1], "snrs_db": [8.0],
            "trials": 12, "seed": 5, "matrix": {"construct": {"seed": 0}},
            "t_mpa": 3, "t_bp": 3, "t_outer": 2
        }"#,
    )
    .unwrap();
    let csv_default = dir.path().join("default.csv");
    let out = gfsim(&[
        "sweep",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        csv_default.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let csv_capped = dir.path().join("capped.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_gfsim"))
        .env("GFSIM_THREADS", "1")
        .args([
            "sweep",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            csv_capped.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(&csv_default).unwrap(),
        std::fs::read(&csv_capped).unwrap()
    );
}

#[test]
fn simulate_rejects_multi_point_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "users": 40, "slots": 20, "col_weight": 2, "packet_len": 6,
            "psk_order": 2, "lambdas": [0.1, 0.2], "snrs_db": [8.0],
            "trials": 8, "seed": 5, "matrix": {"construct": {"seed": 0}}
        }"#,
    )
    .unwrap();
    let out = gfsim(&["simulate", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
