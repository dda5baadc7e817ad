use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microyoung"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn delta_squared_is_rejected_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["product", "check", "delta@0", "delta@0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("reason: s1*+s2* < 0"), "{}", stdout(&o));
    let report = read_json(&dir.path().join("product-check_delta-0_delta-0.json"));
    assert_eq!(report["status"], "not-admissible");
    assert_eq!(report["kernels"][0], "delta@0");
    assert_eq!(report["config"]["margin"], 0.1);
}

#[test]
fn beta_star_of_delta() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["beta-star", "delta@0", "--dim", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&dir.path().join("beta-star_delta-0.json"));
    let v = report["result"]["value"].as_f64().unwrap();
    assert!((v + 0.5).abs() < 0.05, "{v}");
    let csv = std::fs::read_to_string(dir.path().join("beta-star_delta-0.csv")).unwrap();
    assert!(csv.starts_with("p,"));
}

#[test]
fn constant_is_smooth() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["regularity", "constant-1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&dir.path().join("regularity-holder_constant-1.json"));
    assert_eq!(report["result"]["smooth"], true);
    assert_eq!(report["result"]["value"], "inf");
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["product", "check", "cusp@0:0.6", "powerlaw@0:-0.5"];
    assert_eq!(run(&args, a.path()).status.code(), Some(0));
    assert_eq!(run(&args, b.path()).status.code(), Some(0));
    let name = "product-check_cusp-0-0.6_powerlaw-0--0.5.json";
    let mut ja = read_json(&a.path().join(name));
    let mut jb = read_json(&b.path().join(name));
    for j in [&mut ja, &mut jb] {
        j["config"]["output_dir"] = Value::Null;
    }
    assert_eq!(ja, jb);
    assert_eq!(ja["meta"]["timestamp"], 1700000000u64);
}

#[test]
fn bad_kernel_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["regularity", "nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
}

#[test]
fn white_noise_product_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["product", "check", "noise:1", "delta@0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("singular support everywhere"));
}

#[test]
fn extension_with_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["extend", "powerlaw@0:-1", "--coeff", "a0=1.5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = read_json(&dir.path().join("extend_powerlaw-0--1.json"));
    assert_eq!(report["result"]["unique"], false);
    assert_eq!(report["result"]["free_coefficients"][0][1], 1.5);
    let o = run(&["extend", "powerlaw@0:-1", "--coeff", "a1=1"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn config_file_is_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"margin": 0.2, "seed": 7}"#).unwrap();
    let o = run(
        &["beta-star", "delta@0", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report = read_json(&dir.path().join("beta-star_delta-0.json"));
    assert_eq!(report["config"]["margin"], 0.2);
    assert_eq!(report["config"]["seed"], 7);
}

#[test]
fn germ_coherence_passes_for_cusp_times_power() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["germ", "check", "cusp@0:0.8", "powerlaw@0:-0.4"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(
        &[
            "germ",
            "check",
            "cusp@0:0.8",
            "powerlaw@0:-0.4",
            "--gamma",
            "1.0",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}
