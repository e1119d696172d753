use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn graphdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphdiv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("graphdiv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    let _ = std::fs::remove_file(&p);
    p
}

#[test]
fn rank_on_banana() {
    let out = graphdiv(&["--json", "rank", "banana:3", r#"{"Q1":1,"Q2":1}"#]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["payload"]["rank"], 1);
}

#[test]
fn certificate_carries_ordering() {
    let out = graphdiv(&["--json", "rank", "banana:3", r#"{"Q1":1,"Q2":1}"#, "--certificate"]);
    let v = json_of(&out);
    assert_eq!(v["payload"]["nuOrdering"].as_array().unwrap().len(), 2);
    assert!(v["payload"]["witness"].is_object());
}

#[test]
fn divisor_from_file() {
    let p = scratch("d.json");
    std::fs::write(&p, r#"{"Q1": 1, "Q2": 1}"#).unwrap();
    let arg = format!("@{}", p.display());
    let v = json_of(&graphdiv(&["--json", "rank", "banana:3", &arg]));
    assert_eq!(v["payload"]["rank"], 1);
}

#[test]
fn fixtures_all_pass() {
    let out = graphdiv(&["--json", "fixtures"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["payload"]["failed"], 0);
}

#[test]
fn malformed_divisor_exits_one() {
    let out = graphdiv(&["rank", "banana:3", "{bad"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divisor"));
}

#[test]
fn unknown_vertex_exits_one() {
    let out = graphdiv(&["--json", "rank", "banana:3", r#"{"Z":1}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["status"], "error");
}

#[test]
fn unknown_command_exits_one() {
    assert_eq!(graphdiv(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn jacobian_keys() {
    let v = json_of(&graphdiv(&["--json", "jacobian", "complete:4"]));
    let p = &v["payload"];
    assert_eq!(p["invariantFactors"], serde_json::json!([4, 4]));
    assert_eq!(p["order"], 16);
    assert_eq!(p["spanningTrees"], 16);
}

#[test]
fn gonality_of_k4() {
    let v = json_of(&graphdiv(&["--json", "gonality", "complete:4"]));
    assert_eq!(v["payload"]["gonality"], 3);
    assert_eq!(v["payload"]["hyperelliptic"], false);
}

#[test]
fn metric_rank_and_rr() {
    let d = r#"[{"edge":0,"offset":"1/2","coeff":3}]"#;
    let v = json_of(&graphdiv(&["--json", "qrank", "banana:4", d]));
    assert_eq!(v["payload"]["rank"], 1);
    let v = json_of(&graphdiv(&["--json", "rrcheck", "banana:4", d]));
    assert_eq!(v["status"], "ok");
}

#[test]
fn sampling_commands_require_seed() {
    let p = scratch("noseed.jsonl");
    let out = graphdiv(&["sweep", "gonality", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_then_replay() {
    let p = scratch("gon.jsonl");
    let path = p.to_str().unwrap();
    let out = graphdiv(&["--seed", "7", "sweep", "gonality", "--gmax", "3", "--seeds", "12", "--out", path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = std::fs::read_to_string(&p).unwrap().lines().count();
    assert!(lines >= 12);
    let v = json_of(&graphdiv(&["--json", "replay", path]));
    assert_eq!(v["status"], "ok");
    assert_eq!(v["payload"]["reproduced"], lines);
}

#[test]
fn tampered_record_fails_replay() {
    let p = scratch("tamper.jsonl");
    let path = p.to_str().unwrap();
    graphdiv(&["--seed", "1", "sweep", "gonality", "--gmax", "2", "--seeds", "3", "--out", path]);
    let text = std::fs::read_to_string(&p).unwrap();
    let mut first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    first["result"]["gonality"] = serde_json::json!(99);
    std::fs::write(&p, format!("{first}\n")).unwrap();
    assert_eq!(graphdiv(&["replay", path]).status.code(), Some(1));
}

#[test]
fn clean_probe_exits_zero_under_strict() {
    let d = r#"[{"edge":0,"offset":"1/2","coeff":3}]"#;
    let out = graphdiv(&["--json", "--strict", "--seed", "3", "semicontinuity", "banana:4", d, "--eps", "1/4", "--samples", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["payload"]["violations"], 0);
}
