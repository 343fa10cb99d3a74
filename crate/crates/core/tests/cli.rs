use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multiq::data::{load_features, Task};
use multiq::diagram::ModelKind;
use multiq::experiment::{run_experiment, ConfigOverrides};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn multiq(args: &[&str], extra: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiq"))
        .args(["--log", "error"])
        .args(args)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn bad_data_file_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::copy(data_dir().join("lexicon.tsv"), tmp.path().join("lexicon.tsv")).unwrap();
    let data = tmp.path().join("broken.jsonl");
    std::fs::write(&data, "{\"sentence\": \"Dogs chase cats\"}\n").unwrap();
    let out = multiq(&["train", "--model", "cat", "--task", "unstructured", "--epochs", "1", "--seeds", "1", "--data"], &[&data]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn zero_epoch_run_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("run");
    let data = data_dir().join("unstructured_sample.jsonl");
    let out = multiq(
        &["train", "--model", "seq", "--task", "unstructured", "--epochs", "0", "--seeds", "3", "--data"],
        &[&data, Path::new("--out"), &out_dir],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(out_dir.join("seed-3/metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "epoch,train_loss,val_accuracy");
    assert_eq!(lines.len(), 2);
    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["seeds"][0]["best_epoch"], 0);

    let report = multiq(&["report"], &[&out_dir]);
    assert!(report.status.success());
    assert!(out_dir.join("convergence.csv").exists());
}

#[test]
fn generated_features_load_back() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("features.csv");
    let data = data_dir().join("structured_sample.jsonl");
    let out = multiq(&["features", "gen", "--task", "structured", "--seed", "4", "--data"], &[&data, Path::new("--out"), &csv]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with('#'));
    let t = load_features(&csv, 20).unwrap();
    assert_eq!(t.len(), 20);
}

#[test]
fn parse_prints_the_sentence_type() {
    let lex = data_dir().join("lexicon.tsv");
    let out = multiq(&["parse", "Dogs chase cats", "--lexicon"], &[&lex]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("result: s"), "{text}");
}

#[test]
fn bow_experiment_reports_chance_for_every_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ConfigOverrides {
        model: Some(ModelKind::Bow),
        task: Some(Task::Structured),
        data: Some(data_dir().join("structured.jsonl")),
        epochs: Some(3),
        out: Some(tmp.path().join("bow")),
        ..Default::default()
    }
    .resolve()
    .unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.outcomes.len(), 5);
    assert!(report.outcomes.iter().all(|o| o.error.is_none() && o.test_accuracy == Some(0.5)));
    assert_eq!(report.mean_test_accuracy, Some(0.5));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("cfg.json");
    let json = serde_json::json!({
        "model": "cat",
        "task": "structured",
        "data": data_dir().join("structured_sample.jsonl"),
        "epochs": 50,
        "seeds": [9],
    });
    std::fs::write(&cfg_path, json.to_string()).unwrap();
    let out_dir = tmp.path().join("run");
    let out = multiq(&["train", "--epochs", "2", "--config"], &[&cfg_path, Path::new("--out"), &out_dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(out_dir.join("seed-9/metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 4);
}
