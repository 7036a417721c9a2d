use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
trials = 3
record_timing = false
[axes]
snr_db = [0.0]
ris_elements = [16]
targets = [1, 2]
"#;

fn risloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("sweep.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_reports_grid_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = risloc(&["validate", "--config", &cfg]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok: 2 grid points x 3 trials");
}

#[test]
fn validate_names_the_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = risloc(&["validate", "--config", &cfg, "--override", "estimator.g_tau=2.0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("estimator"));

    let cfg = write_config(dir.path(), "trails = 3\n");
    let out = risloc(&["validate", "--config", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trails"));
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let csv = dir.path().join("out.csv");
    let out = risloc(&["simulate", "--config", &cfg, "--out", csv.to_str().unwrap(), "--threads", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr_db,M,K,P,mse,p_d,srp,mean_runtime_ms,mapping_failures");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,16,1,3,"));
    // runtime column is empty with timing off
    assert_eq!(lines[1].split(',').nth(7), Some(""));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(side["trials"], 3);
    assert_eq!(side["threads"], 1);
}

#[test]
fn simulate_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = risloc(&["simulate", "--config", &cfg, "--trials", "2", "--seed", "9", "--override", "axes.targets=[1]"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("0,16,1,2,"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let bad = dir.path().join("missing").join("out.csv");
    let out = risloc(&["simulate", "--config", &cfg, "--out", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("i/o error"));
}

#[test]
fn scene_renders_targets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = risloc(&["scene", "--config", &cfg, "--render", "--trial", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["targets"].as_array().unwrap().len(), 1);
    assert_eq!(v["ris"], serde_json::json!([0.0, 600.0]));
}

#[test]
fn missing_config_fails_cleanly() {
    let out = risloc(&["validate", "--config", "/definitely/not/here.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: i/o error"));
}
