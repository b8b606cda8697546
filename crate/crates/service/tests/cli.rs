mod common;

use std::fs;
use std::process::Command;

use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

use common::{data_file, path_str, qa, qa_ok, spawn_stub};
use litqa::topicfilter::read_model;

fn toy_bundle(dir: &std::path::Path, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join("bundle");
    let corpus = data_file("toy_corpus.jsonl");
    let mut args = vec!["index", "--corpus", path_str(&corpus), "--out", path_str(&out)];
    args.extend_from_slice(extra);
    qa_ok(&args);
    out
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(qa(&[]).status.code(), Some(1));
    assert_eq!(qa(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qa(&["ask", "--bundle", "x"]).status.code(), Some(1));
    let dataset = data_file("toy_qa.jsonl");
    assert_eq!(qa(&["eval", "--dataset", path_str(&dataset), "--mode", "open"]).status.code(), Some(1));
    assert_eq!(qa(&["eval", "--dataset", path_str(&dataset), "--mode", "pipeline"]).status.code(), Some(1));
    assert_eq!(qa(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qa(&["index", "--corpus", "/nonexistent.jsonl", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out = qa(&["eval", "--dataset", path_str(&empty)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty dataset"));
}

#[test]
fn unreachable_reader_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("qa.toml");
    fs::write(
        &config,
        "[reader]\nkind = \"external-extractive\"\nendpoint = \"http://127.0.0.1:9\"\ntimeout_ms = 200\nmax_attempts = 1\n",
    )
    .unwrap();
    let dataset = data_file("toy_qa.jsonl");
    let out = qa(&["eval", "--dataset", path_str(&dataset), "--config", path_str(&config)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reader_endpoint_env_var_overrides_config() {
    let url = spawn_stub(Router::new().route(
        "/extract",
        post(|Json(body): Json<Value>| async move {
            let context = body["context"].as_str().unwrap();
            let first: String = context.chars().take(3).collect();
            Json(json!({ "spans": [{ "text": first, "start": 0, "end": 3, "score": 1.0 }] }))
        }),
    ));
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("qa.toml");
    fs::write(&config, "[reader]\nkind = \"external-extractive\"\nendpoint = \"http://127.0.0.1:9\"\n").unwrap();
    let dataset = data_file("toy_qa.jsonl");
    let out = Command::new(env!("CARGO_BIN_EXE_qa"))
        .args(["eval", "--dataset", path_str(&dataset), "--config", path_str(&config)])
        .env("QA_READER_ENDPOINT", &url)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["system"], "keyword-cosine+external-extractive");
    assert_eq!(report["per_example"][0]["prediction_text"], "The");
}

#[test]
fn ask_prints_timing_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = toy_bundle(dir.path(), &[]);
    let plain: Value = serde_json::from_slice(&qa_ok(&["ask", "--bundle", path_str(&bundle), "masks"])).unwrap();
    assert!(plain.get("timing").is_none());
    let timed: Value =
        serde_json::from_slice(&qa_ok(&["ask", "--bundle", path_str(&bundle), "--timings", "--top-n", "2", "masks"]))
            .unwrap();
    assert_eq!(timed["hits"].as_array().unwrap().len(), 2);
    for stage in ["filter", "retrieve", "read"] {
        assert!(timed["timing"][stage].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn lda_filter_bundle_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = toy_bundle(
        dir.path(),
        &["--pipeline", "lda-filter", "--topics", "4", "--iterations", "50", "--min-tokens", "15"],
    );
    let manifest: Value = serde_json::from_slice(&fs::read(bundle.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["pipeline"], "lda-filter");
    assert_eq!(manifest["lda_excluded"], json!(["cord-019"]));
    assert!(bundle.join("lda.ldaf").exists());
    let result: Value =
        serde_json::from_slice(&qa_ok(&["ask", "--bundle", path_str(&bundle), "anticoagulation and mortality"]))
            .unwrap();
    assert_eq!(result["hits"].as_array().unwrap().len(), 5);
}

#[test]
fn eval_out_writes_report_and_renders_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let dataset = data_file("toy_qa.jsonl");
    let table = qa_ok(&["eval", "--dataset", path_str(&dataset), "--out", path_str(&report)]);
    let table = String::from_utf8(table).unwrap();
    assert!(table.starts_with("Dataset"));
    assert!(table.contains("toy_qa"));
    let rendered = String::from_utf8(qa_ok(&["report", "render", path_str(&report)])).unwrap();
    assert_eq!(rendered, table);
}

#[test]
fn lda_fit_writes_a_readable_model() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("toy.ldaf");
    let corpus = data_file("toy_corpus.jsonl");
    let out = qa_ok(&[
        "lda", "fit", "--corpus", path_str(&corpus), "--out", path_str(&model_path), "--topics", "3",
        "--iterations", "30", "--top-words", "4",
    ]);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 3);
    let model = read_model(std::io::BufReader::new(fs::File::open(&model_path).unwrap())).unwrap();
    assert_eq!(model.topics, 3);
    assert_eq!(model.iterations, 30);
}
