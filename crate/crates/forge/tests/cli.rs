use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use cocycle_core::io::{cocycle_from_json, cocycle_to_json};

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cocycle-forge")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cocycle-forge-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn gen_args(seed: &str) -> Vec<&str> {
    vec!["gen", "--kind", "random-bounded", "--dim", "3", "--period", "7", "--bound", "2", "--seed", seed]
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = forge(&gen_args("42"));
    let b = forge(&gen_args("42"));
    let c = forge(&gen_args("43"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generated_json_round_trips_bit_exact() {
    let out = forge(&gen_args("5"));
    let text = String::from_utf8(out.stdout).unwrap();
    let c = cocycle_from_json(&text).unwrap();
    assert_eq!(cocycle_to_json(&c).unwrap(), text.trim_end());
    assert_eq!(cocycle_from_json(&cocycle_to_json(&c).unwrap()).unwrap().maps(), c.maps());
}

#[test]
fn corrupted_json_is_an_input_error() {
    let path = scratch("corrupt.json");
    fs::write(&path, r#"{"dim": 2, "period": 1, "matrices": [[1.0, 0.0, 0.0]]}"#).unwrap();
    let out = forge(&["analyze", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&path, "{not json").unwrap();
    assert_eq!(forge(&["analyze", "--in", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(forge(&["analyze", "--in", "/nonexistent/c.json"]).status.code(), Some(2));
}

#[test]
fn invalid_spec_is_an_input_error() {
    let out = forge(&["gen", "--kind", "random-bounded", "--dim", "2", "--period", "3", "--bound", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cancellation_analysis_has_zero_graph() {
    let c = scratch("cancel.json");
    let meta = scratch("cancel-meta.json");
    let gen = forge(&[
        "gen",
        "--kind",
        "cancellation",
        "--dim",
        "2",
        "--period",
        "4",
        "--bound",
        "2",
        "--out",
        c.to_str().unwrap(),
        "--meta",
        meta.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out = forge(&["analyze", "--in", c.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for s in v["graph"]["sigma"].as_array().unwrap() {
        assert!(s.as_f64().unwrap().abs() < 1e-12);
    }
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(meta).unwrap()).unwrap();
    assert_eq!(m["spec"]["kind"], "cancellation");
}

#[test]
fn mix_writes_a_path_csv() {
    let c = scratch("mix.json");
    let csv = scratch("mix.csv");
    let gen = forge(&[
        "gen",
        "--kind",
        "near-isometry",
        "--dim",
        "2",
        "--period",
        "16",
        "--bound",
        "1.2",
        "--seed",
        "3",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out =
        forge(&["mix", "--in", c.to_str().unwrap(), "--index", "1", "--eps", "0.5", "--out", csv.to_str().unwrap()]);
    // A complex or dominated draw is a legitimate refusal with status 1.
    assert!(matches!(out.status.code(), Some(0) | Some(1)), "{}", String::from_utf8_lossy(&out.stderr));
    if out.status.success() {
        let text = fs::read_to_string(csv).unwrap();
        assert!(text.lines().next().unwrap().starts_with("sample,"));
        assert!(text.lines().count() > 1);
    }
}

#[test]
fn verify_reports_are_deterministic() {
    let a = forge(&["verify", "--suite", "core", "--seeds", "100"]);
    let b = forge(&["verify", "--suite", "core", "--seeds", "100"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_cocycle-forge"))
        .args(["verify", "--suite", "core", "--seeds", "1"])
        .env("COCYCLE_FORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
