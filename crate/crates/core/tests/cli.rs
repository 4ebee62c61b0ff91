use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sspec")).args(args).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_of_cyclic_five_lists_both_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sspec(&["spectrum", "--group", "cyclic:5", "--op", "s + S", "--schedule", "5,10", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let atoms = read_json(&dir.path().join("atoms.json"));
    let list = atoms["result"]["atoms"].as_array().unwrap();
    let summary: Vec<(String, String)> = list
        .iter()
        .map(|a| {
            let poly: Vec<String> = serde_json::from_value(a["minimal_poly"].clone()).unwrap();
            (poly.join(","), a["weight_per_root_exact"].as_str().unwrap().to_string())
        })
        .collect();
    assert!(summary.contains(&("-2,1".to_string(), "1/5".to_string())), "{summary:?}");
    assert!(summary.contains(&("-1,1,1".to_string(), "2/5".to_string())), "{summary:?}");
    assert_eq!(atoms["version"], Value::from(env!("CARGO_PKG_VERSION")));
}

#[test]
fn emitted_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for cmd in ["spectrum", "kernel", "quantize", "fkdet"] {
        let o = sspec(&[cmd, "--group", "cyclic:4", "--op", "s + S", "--schedule", "4,8", "--lambda", "0", "--lambda", "1/3", "--out", out]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(dir.path().join(format!("{cmd}.json"))).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(sspec_core::cli::to_json_string(&v), text, "{cmd}");
        assert_eq!(v["config"]["schedule"], serde_json::json!([4, 8]));
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let empty = sspec(&["spectrum", "--group", "cyclic:5", "--op", "s + S", "--schedule", "", "--out", out]);
    assert_eq!(empty.status.code(), Some(2));
    let bad_group = sspec(&["spectrum", "--group", "cyclic:x", "--op", "s", "--schedule", "5"]);
    assert_eq!(bad_group.status.code(), Some(2));
    let bad_op = sspec(&["spectrum", "--group", "cyclic:5", "--op", "s + q", "--schedule", "5", "--out", out]);
    assert_eq!(bad_op.status.code(), Some(2));
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"group": {"type": "cyclic", "m": 3}, "operator": "s", "schedule": [3], "colour": 1}"#).unwrap();
    let unknown = sspec(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(2));
    let missing = sspec(&["spectrum", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_three_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sspec(&["spectrum", "--group", "cyclic:5", "--op", "s + S", "--schedule", "7", "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "computation");
    assert!(dir.path().join("error.json").exists());
    let o = sspec(&["fkdet", "--group", "cyclic:2", "--op", "s", "--schedule", "2", "--require-flag", "--out", out]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn polylab_examples() {
    let o = sspec(&["polylab", "mahler", "t^2 - t - 1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["result"]["mahler"]["value"].as_f64().unwrap() - 1.618_033_988_7).abs() < 1e-9);
    let o = sspec(&["polylab", "kronecker", "t"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["output"], "t^2 + 1");
    let o = sspec(&["polylab", "factor", "t^4 - 1"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["factors"].as_array().unwrap().len(), 3);
    let o = sspec(&["polylab", "discrepancy", "t^2 + t + 1", "--sector=-0.5,0.5", "--require-irreducible"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["reports"][0]["observed"].as_f64(), Some(0.0));
    let o = sspec(&["polylab", "enumerate", "--degree", "1", "--radius", "1"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["count"], 3);
}

#[test]
fn quantize_identity_is_two_cos_pi_over_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sspec(&["quantize", "--group", "cyclic:3", "--op", "1", "--schedule", "3", "--out", out]);
    assert!(o.status.success());
    let v = read_json(&dir.path().join("quantize.json"));
    assert_eq!(v["result"]["verdict"]["regime"]["kind"], "grid");
    assert_eq!(v["result"]["verdict"]["regime"]["q"], 3);
    assert!((v["result"]["verdict"]["regime"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn free_group_spectrum_reports_kesten_distance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sspec(&["spectrum", "--group", "free:2", "--op", "a + A + b + B", "--schedule", "500,1000", "--seed", "3", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&dir.path().join("spectrum.json"));
    assert!(v["result"]["ks_kesten_mckay"].as_f64().is_some());
}
