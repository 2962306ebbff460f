use serde_json::Value;
use std::process::{Command, Output};

fn finitary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finitary")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = finitary(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn crossing_csv_has_one_row_per_grid_point() {
    let out = finitary(&["crossing", "--n", "6", "--h-grid", "-0.3,0,0.3", "--replicas", "50", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "quantity,h,n,m,estimate,std_error,replicas,wall_time_s");
    assert_eq!(lines.len(), 4);
}

#[test]
fn summary_echoes_config_and_is_reproducible() {
    let args = ["--model", "ising", "--beta", "0.25", "--seed", "0x2a", "--replicas", "40", "audit", "--n", "5", "--h", "-0.1"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["command"], "audit");
    assert_eq!(a["config"]["seed"], 42);
    assert_eq!(a["config"]["model"], "ising");
    assert_eq!(a["result"]["violations"], 0);
    assert!(a["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("run.toml");
    std::fs::write(&toml_path, "model = \"bernoulli\"\nreplicas = 30\nseed = 9\nsizes = [4]\n").unwrap();
    let cfg = toml_path.to_str().unwrap();
    let from_file = json(&["--config", cfg, "audit"]);
    assert_eq!(from_file["config"]["replicas"], 30);
    assert_eq!(from_file["result"]["fields"], 30);
    let overridden = json(&["--config", cfg, "--replicas", "12", "audit"]);
    assert_eq!(overridden["result"]["fields"], 12);
    assert_eq!(overridden["config"]["seed"], 9);

    let json_path = dir.path().join("run.json");
    std::fs::write(&json_path, r#"{"model":"bernoulli","replicas":7}"#).unwrap();
    let from_json = json(&["--config", json_path.to_str().unwrap(), "audit", "--n", "3"]);
    assert_eq!(from_json["result"]["fields"], 7);
}

#[test]
fn out_dir_gets_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = finitary(&["--out", dir.path().to_str().unwrap(), "--replicas", "20", "rsw", "--p", "0.5", "--ns", "4,8"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("rsw.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rsw.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn threshold_report_matches_exact_values() {
    let v = json(&["threshold", "--event", "maj3", "--p", "0.5"]);
    let r = &v["result"]["report"];
    assert!((r["prob"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!((r["derivative"]["closed_form"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!(v["result"]["interval"].is_null());
}

#[test]
fn errors_exit_nonzero_with_message() {
    let out = finitary(&["tau", "--replicas", "5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("needs --model ising"));
    let out = finitary(&["critical", "--bracket", "0.1"]);
    assert!(!out.status.success());
    let out = finitary(&["--model", "ising", "--beta", "0", "critical", "--n", "4", "--replicas", "20"]);
    assert!(!out.status.success());
    let out = finitary(&["threshold", "--event", "nope"]);
    assert!(!out.status.success());
}

#[test]
fn threshold_reads_event_files_with_ising_levels() {
    let spec = finitary::threshold::EventSpec::from_fn("any_high", 2, 5, true, |w| w.iter().any(|&x| x >= 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("event.json");
    std::fs::write(&path, spec.to_json()).unwrap();
    let v = json(&["--beta", "0.3", "threshold", "--event-file", path.to_str().unwrap(), "--h", "0.1", "--h2", "0.4"]);
    assert_eq!(v["result"]["report"]["derivative"]["variable"], "h");
    assert!(v["result"]["interval"]["implied_k2"].as_f64().unwrap() > 0.0);
    let out = finitary(&["threshold", "--event-file", "/nonexistent.json"]);
    assert!(!out.status.success());
}
