//! End-to-end checks of the binary: exit codes, determinism, and output
//! plumbing. Kept on tiny configs so the whole file runs in seconds.

use std::fs;
use std::process::{Command, Output};

fn onsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onsearch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> Vec<u8> {
    let out = onsearch(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

const TINY_SIMULATE: &str =
    r#"{"kind":"double-bound","curves":3,"horizon_min":4,"horizon_max":10}"#;

#[test]
fn csv_runs_are_deterministic_and_headed() {
    let first = stdout_of(&["lowerbound", "--seed", "5"]);
    let second = stdout_of(&["lowerbound", "--seed", "5"]);
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("experiment,trial,params,metric,value,seed\n"));
    assert!(text.lines().count() > 1);
}

#[test]
fn json_format_emits_one_object_per_line() {
    let out = stdout_of(&["lowerbound", "--format", "json"]);
    let text = String::from_utf8(out).unwrap();
    assert!(text.lines().count() > 1);
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["experiment", "trial", "params", "metric", "value", "seed"] {
            assert!(row.get(key).is_some(), "missing {key} in {line}");
        }
        assert_eq!(row["experiment"], "lowerbound-demo");
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let streamed = stdout_of(&["compare-losses"]);
    let filed = stdout_of(&["compare-losses", "--out", path.to_str().unwrap()]);
    assert!(filed.is_empty());
    assert_eq!(fs::read(&path).unwrap(), streamed);
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    fs::write(&path, TINY_SIMULATE).unwrap();
    let out = stdout_of(&["simulate", "--config", path.to_str().unwrap()]);
    let text = String::from_utf8(out).unwrap();
    // Header, three curves, one aggregate.
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn seed_flag_reproduces_and_varies_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    fs::write(&path, TINY_SIMULATE).unwrap();
    let config = path.to_str().unwrap();
    let seven_a = stdout_of(&["simulate", "--config", config, "--seed", "7"]);
    let seven_b = stdout_of(&["simulate", "--config", config, "--seed", "7"]);
    let eight = stdout_of(&["simulate", "--config", config, "--seed", "8"]);
    assert_eq!(seven_a, seven_b);
    assert_ne!(seven_a, eight);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    fs::write(
        &path,
        r#"{"kind":"double-bound","curves":20,"horizon_min":4,"horizon_max":30}"#,
    )
    .unwrap();
    let config = path.to_str().unwrap();
    let single = stdout_of(&["simulate", "--config", config, "--threads", "1"]);
    let multi = stdout_of(&["simulate", "--config", config, "--threads", "4"]);
    assert_eq!(single, multi);
}

#[test]
fn unknown_config_field_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"kind":"double-bound","curvez":2}"#).unwrap();
    let out = onsearch(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("curvez"));
}

#[test]
fn config_kind_must_match_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    fs::write(&path, TINY_SIMULATE).unwrap();
    let out = onsearch(&["frontier", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("double-bound") && stderr.contains("pad-frontier"));
}

#[test]
fn out_of_range_config_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"kind":"pad-frontier","epsilons":[2.0]}"#).unwrap();
    let out = onsearch(&["frontier", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_two() {
    let out = onsearch(&["simulate", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_two() {
    let out = onsearch(&["simulate", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = onsearch(&["meditate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_path_exits_one() {
    let out = onsearch(&["lowerbound", "--out", "/no-such-dir/report.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot write"));
}
