use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "[system]\nnum_nodes = 8\nlevels = [1.0, 10.0]\n[time]\nt_start = 0.0\nt_end = 4.0\ndt = 0.01\nsample_stride = 10\n";

fn dtransport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtransport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a diagnostic");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr `{line}` is not JSON: {e}"))
}

#[test]
fn simulate_writes_artifacts_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SMALL);
    let out_dir = dir.path().join("out");
    let out = dtransport(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(summary["num_nodes"], 8);

    let csv = std::fs::read_to_string(out_dir.join("occupation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,P_1,P_2,P_3,P_4,P_5,P_6,P_7,P_8");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 17 significant digits: one before the point, sixteen after
    let mantissa = first[1].split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").trim_start_matches('-').len(), 17);
    assert_eq!(csv.lines().count(), 1 + 41);

    let td = std::fs::read_to_string(out_dir.join("trace_distance.csv")).unwrap();
    assert!(td.starts_with("t,T_ground,T_excited,T_ground_raw,T_excited_raw\n"));
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk, summary);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        assert!(dtransport(&["simulate", "--config", &cfg, "--out", d.to_str().unwrap()]).status.success());
    }
    for f in ["occupation.csv", "summary.json", "trace_distance.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_key_fails_with_structured_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[system]\nnum_nodes = 8\nlevles = [1.0, 2.0]\n");
    let out = dtransport(&["simulate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config_parse");
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains("levles") && msg.contains("line 3"), "{msg}");
}

#[test]
fn missing_config_is_an_io_error() {
    let out = dtransport(&["validate", "--config", "/nonexistent/run.toml"]);
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn invalid_physics_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[system]\nnum_nodes = 1\nlevels = [1.0, 10.0]\n");
    let out = dtransport(&["validate", "--config", &cfg]);
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "model");
}

#[test]
fn sweep_and_compare_write_comparison_files() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = write_config(
        dir.path(),
        "sweep.toml",
        &format!("{SMALL}[sweep]\naxis = \"initial_alpha\"\nvalues = [0.5, 1.0]\n"),
    );
    let out_dir = dir.path().join("sweep");
    let out = dtransport(&["sweep", "--config", &sweep, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cmp: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("comparison.json")).unwrap()).unwrap();
    assert_eq!(cmp["axis"], "initial_alpha");
    assert_eq!(cmp["rows"].as_array().unwrap().len(), 2);
    assert!(out_dir.join("initial_alpha_01/occupation.csv").exists());

    let single = write_config(dir.path(), "single.toml", SMALL);
    let out_dir = dir.path().join("compare");
    let out = dtransport(&["compare", "--config", &single, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("redfield/occupation.csv").exists());
    assert!(out_dir.join("markov/summary.json").exists());
    let cmp: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("comparison.json")).unwrap()).unwrap();
    assert_eq!(cmp["eta_sensitivity"].as_array().unwrap().len(), 3);
}

#[test]
fn sweep_with_failing_value_exits_nonzero_but_runs_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.toml",
        &format!("{SMALL}[sweep]\naxis = \"system_gap\"\nvalues = [10.0, 10.05]\n"),
    );
    let out_dir = dir.path().join("sweep");
    let out = dtransport(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "sweep_partial_failure");
    assert!(out_dir.join("system_gap_00/summary.json").exists());
    let cmp: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("comparison.json")).unwrap()).unwrap();
    assert_eq!(cmp["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn validate_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "small.toml",
        "[system]\nnum_nodes = 3\nlevels = [1.0, 10.0]\n[environment]\ncount = 1\n[time]\nt_start = 0.0\nt_end = 2.0\ndt = 0.01\n",
    );
    let out = dtransport(&["validate", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["exact"]["dimension"], 12);
    assert_eq!(report["exact"]["truncation"], "single_occupation");
}

#[test]
fn missing_output_directory_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SMALL);
    let out = dtransport(&["simulate", "--config", &cfg]);
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "config_invalid");
}
