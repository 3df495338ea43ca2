use std::path::Path;
use std::process::{Command, Output};

fn unifi(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unifi"))
        .args(args)
        .current_dir(dir)
        .env("UNIFI_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SYNTH: &str = r#"{"streams_per_class": 1, "duration_s": 12.0, "grid": {"n80": 8, "n20": 4, "n24": 4}}"#;

const EXPERIMENT: &str = r#"{
  "dataset": {"manifest": "data/manifest.json"},
  "model": {"d_r": 8, "d_h": 8, "d_k": 8, "d_v": 8, "q_refs": 8, "gru_hidden": 8},
  "train": {"epochs": 1, "seeds": [0, 1]}
}"#;

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(unifi(&["bogus"], d).status.code(), Some(2));
    assert_eq!(unifi(&["run", "--config", "missing.json"], d).status.code(), Some(2));
    write(d, "bad.json", r#"{"train": {"split": 2.0}}"#);
    let out = unifi(&["run", "--config", "bad.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train.split"));
    write(d, "nodata.json", r#"{"dataset": {"manifest": "nowhere/manifest.json"}}"#);
    assert_eq!(unifi(&["run", "--config", "nodata.json"], d).status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_unifi"))
        .args(["metrics", "--in", "x.jsonl"])
        .current_dir(d)
        .env("UNIFI_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_sanitize_metrics_train_eval_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "synth.json", SYNTH);
    write(d, "exp.json", EXPERIMENT);

    let ok = |args: &[&str]| {
        let out = unifi(args, d);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    ok(&["synth", "--config", "synth.json", "--out-dir", "data"]);
    let manifest = std::fs::read_to_string(d.join("data/manifest.json")).unwrap();
    assert!(manifest.contains("class2_s0.jsonl"));

    ok(&["sanitize", "--in", "data/class0_s0.jsonl", "--out", "w/windows.bin", "--iss", "4", "--report", "w/r.json"]);
    let windows = unifi_core::io::load_windows(d.join("w/windows.bin")).unwrap();
    assert_eq!(windows.len(), 3);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("w/r.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["k_sel"], 4);

    let out = ok(&["metrics", "--in", "data/class1_s0.jsonl"]);
    let metrics: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(metrics["clusters"].as_array().unwrap().len(), 3);

    ok(&["train", "--config", "exp.json", "--seed", "3", "--out-dir", "m"]);
    for f in ["model.unfi", "preprocessing.json", "history.json", "train_summary.json"] {
        assert!(d.join("m").join(f).exists(), "{f}");
    }
    ok(&["eval", "--config", "exp.json", "--seed", "3", "--out-dir", "m"]);
    let train: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("m/train_summary.json")).unwrap()).unwrap();
    let eval: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("m/eval.json")).unwrap()).unwrap();
    assert_eq!(train["test_accuracy"], eval["accuracy"]);

    ok(&["run", "--config", "exp.json", "--out-dir", "r1"]);
    ok(&["run", "--config", "exp.json", "--out-dir", "r2"]);
    let load = |p: &str| {
        let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join(p)).unwrap()).unwrap();
        v["elapsed_s"] = 0.into();
        v
    };
    let r1 = load("r1/report.json");
    assert_eq!(r1, load("r2/report.json"));
    assert_eq!(r1["seeds"], serde_json::json!([0, 1]));
    assert_eq!(r1["config"]["train"]["epochs"], 1);
}
