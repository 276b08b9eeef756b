use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const RECORD: &str = include_str!("../../core/tests/fixtures/game19_completed.txt");

fn buildzone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_buildzone")).args(args).output().unwrap()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn bench_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = buildzone(&["bench", "--steps", "2000", "--episodes", "2", "--seed", "5", "--out", p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (json_file(&a), json_file(&b));
    assert!(a["sps"].as_f64().unwrap() > 0.0);
    assert!(a["p99_us"].as_f64().unwrap() >= a["p50_us"].as_f64().unwrap());
    assert_eq!(a["action_digest"], b["action_digest"]);
    assert_eq!(a["final_grids"], b["final_grids"]);
}

#[test]
fn run_scripted_on_generated_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = buildzone(&["run", "--generate", "4", "--agent", "scripted", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_file(&out);
    assert_eq!(r["mean_f1"], 1.0);
    assert_eq!(r["tasks"].as_array().unwrap().len(), 4);
    assert!(r["per_skill"]["flat"]["count"].as_u64().is_some() || r["per_skill"]["tall"]["count"].as_u64().is_some());
}

#[test]
fn run_random_on_task_file() {
    let dir = tempfile::tempdir().unwrap();
    let tasks = dir.path().join("tasks.json");
    std::fs::write(&tasks, r#"{"task_id": "row", "target_blocks": [[3,0,3,1],[4,0,3,1]]}"#).unwrap();
    let o = buildzone(&["run", "--task", p(&tasks), "--agent", "random", "--max-steps", "10"]);
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let f1 = r["tasks"][0]["f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f1));
    assert_eq!(r["tasks"][0]["steps"], 10);
    assert_eq!(r["tasks"][0]["skills"], serde_json::json!(["flat"]));
}

#[test]
fn convert_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("record.txt");
    std::fs::write(&raw, RECORD).unwrap();
    let (demos, demos2, tasks) = (
        dir.path().join("demos.jsonl"),
        dir.path().join("demos2.jsonl"),
        dir.path().join("tasks.json"),
    );
    let o = buildzone(&["convert", "--raw", p(&raw), "--out", p(&demos), "--tasks-out", p(&tasks)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary, serde_json::json!({"parsed": 1, "replay_ok": 1, "warnings": 0, "failed": 0}));
    buildzone(&["convert", "--raw", p(&raw), "--out", p(&demos2)]);
    assert_eq!(std::fs::read(&demos).unwrap(), std::fs::read(&demos2).unwrap());

    let o = buildzone(&["eval", "--log", p(&demos), "--tasks", p(&tasks)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["mean_f1"], 1.0);
    assert_eq!(r["tasks"][0]["task_id"], "game19-step1");
}

#[test]
fn eval_rejects_unknown_task_ids() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("record.txt");
    std::fs::write(&raw, RECORD).unwrap();
    let demos = dir.path().join("demos.jsonl");
    buildzone(&["convert", "--raw", p(&raw), "--out", p(&demos)]);
    let tasks = dir.path().join("tasks.json");
    std::fs::write(&tasks, r#"{"task_id": "other", "target_blocks": [[3,0,3,1]]}"#).unwrap();
    let o = buildzone(&["eval", "--log", p(&demos), "--tasks", p(&tasks)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn corrupt_record_fails_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("bad.json");
    std::fs::write(&raw, "{\"gameId\": 19, \"tape\": ").unwrap();
    let o = buildzone(&["convert", "--raw", p(&raw), "--out", p(&dir.path().join("o.jsonl"))]);
    assert_eq!(o.status.code(), Some(1));
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["failed"], 1);
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(buildzone(&["run", "--task", "/nonexistent/tasks.json"]).status.code(), Some(1));
    assert_eq!(buildzone(&["bench", "--render", "maybe"]).status.code(), Some(1));
    assert_eq!(buildzone(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        buildzone(&["serve", "--port", "0", "--static-dir", "/nonexistent/assets"]).status.code(),
        Some(1)
    );
    assert_eq!(buildzone(&["--help"]).status.code(), Some(0));
}
