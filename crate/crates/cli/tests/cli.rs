use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfa")).args(args).output().expect("binary runs")
}

fn header_len(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().next().unwrap().split(',').count()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_writes_features_and_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = cfa(&["synth", "--form", "linear", "--dims", "100", "--sigma", "10", "--n", "3000", "--seed", "7", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header_len(&out), 101);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",y"));
    assert_eq!(text.lines().count(), 3001);
}

#[test]
fn reduce_output_matches_partition() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let part = dir.path().join("p.json");
    let red = dir.path().join("r.csv");
    assert!(cfa(&["synth", "--dims", "30", "--sigma", "1", "--n", "400", "--seed", "3", "--out", s(&data)])
        .status
        .success());
    let o = cfa(&[
        "reduce", "--algo", "nonlincfa", "--epsilon", "0.001", "--agg", "mean", "--in", s(&data), "--target", "y",
        "--out-partition", s(&part), "--out-reduced", s(&red),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p: serde_json::Value = serde_json::from_str(&fs::read_to_string(&part).unwrap()).unwrap();
    let d = p["clusters"].as_array().unwrap().len();
    assert_eq!(header_len(&red), d + 1);
    assert_eq!(p["aggregation"], "mean");
    assert_eq!(p["transform"], "identity");
    let names: usize = p["clusters"].as_array().unwrap().iter().map(|c| c.as_array().unwrap().len()).sum();
    assert_eq!(names, 30);
}

#[test]
fn evaluate_writes_report_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let report = dir.path().join("r.json");
    let rows = dir.path().join("rows.csv");
    fs::write(
        &cfg,
        r#"{
            "algorithm": "genlincfa",
            "epsilon_grid": [0.5, 0.9],
            "seed": 3,
            "repetitions": 2,
            "data": {"source": "synthetic", "spec": {"dims": 10, "noise_sigma": 1.0, "form": "linear_in_x"}, "n": 120}
        }"#,
    )
    .unwrap();
    let o = cfa(&["evaluate", "--config", s(&cfg), "--out", s(&report), "--out-rows", s(&rows)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["summary"].as_array().unwrap().len(), 2);
    assert_eq!(r["rows"].as_array().unwrap().len(), 4);
    assert_eq!(r["metadata"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(fs::read_to_string(&rows).unwrap().lines().count(), 5);
}

#[test]
fn bad_config_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"algorithm": "nonlincfa", "seed": 1, "surprise": true, "data": {"source": "csv", "path": "x.csv", "target": "y"}}"#).unwrap();
    let o = cfa(&["evaluate", "--config", s(&cfg), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_input_file_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = cfa(&[
        "reduce", "--algo", "lincfa", "--in", s(&dir.path().join("none.csv")), "--target", "y",
        "--out-partition", "p.json", "--out-reduced", "r.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = cfa(&["synth", "--dims", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cfa(&["reduce", "--algo", "pca"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--algo"));
    let o = cfa(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_theory_gaussian_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = cfa(&["verify-theory", "--suite", "gaussian-equivalence", "--reps", "2000", "--seed", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suite"], "gaussian-equivalence");
}

#[test]
fn unknown_suite_fails() {
    let o = cfa(&["verify-theory", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}
