use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn covertauth(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_covertauth"));
    cmd.args(args).env_remove("COVERTAUTH_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn manifest(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("manifest is JSON")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = covertauth(&["covert", "--bogus"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(covertauth(&[], &[]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(covertauth(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    assert_eq!(
        covertauth(&["sweep", "--experiment", "nope"], &[]).status.code(),
        Some(1)
    );
}

#[test]
fn out_of_range_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epsilon = -1\n");
    let out = covertauth(
        &["pattern", "--config", &cfg, "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# comment\nepsilon = 0.2\nthis is not a pair\n");
    let out = covertauth(&["pattern", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epsilom = 0.2\n");
    let out = covertauth(&["pattern", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilom"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = covertauth(&["pattern", "--out", "unused"], &[("COVERTAUTH_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infeasible_design_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epsilon = 0.000001\nkappa_e_db = 40\n");
    let out = covertauth(
        &["covert", "--config", &cfg, "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn failing_gates_exit_with_three() {
    let out = covertauth(&["validate", "--trials", "20", "--seed", "3"], &[]);
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(&out);
    assert!(m["gates"].as_array().unwrap().iter().any(|g| g["passed"] == false));
}

#[test]
fn validation_gates_pass() {
    let out = covertauth(&["validate", "--trials", "20000", "--seed", "42"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out);
    assert_eq!(m["seed"], 42);
    let gates = m["gates"].as_array().unwrap();
    assert_eq!(gates.len(), 5);
    assert!(gates.iter().all(|g| g["passed"] == true));
}

#[test]
fn empty_config_uses_defaults_and_emits_listed_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out_dir = dir.path().join("out");
    let out = covertauth(&["pattern", "--config", &cfg, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&out);
    assert_eq!(m["seed"], 1);
    assert_eq!(m["trials"], 100_000);
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    let path = Path::new(files[0]["path"].as_str().unwrap());
    assert_eq!(path.file_name().unwrap(), "beam-pattern_1.csv");
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("angle_deg,ideal_db,alice_db,eve_db\n"));
    assert_eq!(text.lines().count(), 362);
}

#[test]
fn csv_is_identical_across_thread_counts_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4", "4"].into_iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = covertauth(
            &[
                "sweep",
                "--experiment",
                "validate-roc",
                "--trials",
                "2000",
                "--seed",
                "9",
                "--out",
                out_dir.to_str().unwrap(),
            ],
            &[("COVERTAUTH_THREADS", threads)],
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(out_dir.join("validate-roc_9.csv")).unwrap());
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}
