mod common;

use std::path::Path;
use std::sync::Arc;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use common::{data_file, spawn_stub};
use litqa::eval::EvalReport;
use litqa::pipeline::{build_index, Engine, EvalMode, PipelineConfig, QueryResult};
use litqa_service::router;

struct Fixture {
    _dir: tempfile::TempDir,
    engine: Arc<Engine>,
    url: String,
}

fn fixture_with(ui_dir: Option<&Path>) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let config = PipelineConfig::default();
    let bundle = build_index(&data_file("toy_corpus.jsonl"), &config, &dir.path().join("bundle")).unwrap();
    let engine = Arc::new(Engine::new(Arc::new(bundle), config).unwrap());
    let url = spawn_stub(router(engine.clone(), ui_dir));
    Fixture { _dir: dir, engine, url }
}

fn fixture() -> Fixture {
    fixture_with(None)
}

fn post_raw(url: &str, body: &'static str) -> (StatusCode, Value) {
    let resp = Client::new()
        .post(url)
        .header("content-type", "application/json")
        .body(body)
        .send()
        .unwrap();
    let status = resp.status();
    (status, resp.json().unwrap())
}

#[test]
fn health_reports_ok() {
    let f = fixture();
    let body: Value = reqwest::blocking::get(format!("{}/health", f.url)).unwrap().json().unwrap();
    assert_eq!(body, json!({ "status": "ok" }));
}

#[test]
fn ask_matches_the_in_process_call() {
    let f = fixture();
    for (question, top_n) in [
        ("What is the incubation period of the virus?", None),
        ("Which drug reduced mortality among ventilated patients?", Some(3)),
        ("zebra", Some(1)),
    ] {
        let mut body = json!({ "question": question });
        if let Some(n) = top_n {
            body["top_n"] = json!(n);
        }
        let resp = Client::new().post(format!("{}/ask", f.url)).json(&body).send().unwrap();
        assert_eq!(resp.status(), StatusCode::OK);
        let remote: QueryResult = resp.json().unwrap();
        let timing = remote.timing.clone().expect("timing present over HTTP");
        assert!(timing.values().all(|ms| *ms >= 0.0));
        let local = f.engine.answer_question(question, top_n).unwrap();
        assert_eq!(remote.without_timing(), local.without_timing(), "{question}");
    }
}

#[test]
fn malformed_bodies_get_400_with_an_error_object() {
    let f = fixture();
    let ask = format!("{}/ask", f.url);
    for body in [r#"{"question": "#, "[]", r#"{"top_n": 3}"#, r#"{"question": "x", "extra": 1}"#] {
        let (status, v) = post_raw(&ask, body);
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(v["error"]["kind"], "bad_request");
        assert!(v["error"]["message"].as_str().unwrap().contains("malformed"));
    }
    let (status, v) = post_raw(&ask, r#"{"question": "   "}"#);
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"]["message"].is_string());

    let (status, v) = post_raw(&ask, r#"{"question": "masks", "top_n": 0}"#);
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn config_returns_the_active_config() {
    let f = fixture();
    let remote: PipelineConfig = reqwest::blocking::get(format!("{}/config", f.url)).unwrap().json().unwrap();
    assert_eq!(&remote, f.engine.config());
}

#[test]
fn eval_matches_the_in_process_run() {
    let f = fixture();
    let dataset = data_file("toy_qa.jsonl");
    for mode in ["rc", "pipeline"] {
        let resp = Client::new()
            .post(format!("{}/eval", f.url))
            .json(&json!({ "dataset_path": dataset, "mode": mode }))
            .send()
            .unwrap();
        assert_eq!(resp.status(), StatusCode::OK);
        let remote: EvalReport = resp.json().unwrap();
        let local = f.engine.run_eval(&dataset, mode.parse::<EvalMode>().unwrap()).unwrap().report;
        assert_eq!(remote, local);
        assert_eq!(remote.example_count, 12);
    }
}

#[test]
fn eval_errors_are_structured() {
    let f = fixture();
    let url = format!("{}/eval", f.url);
    let (status, v) = post_raw(&url, r#"{"dataset_path": "x.jsonl", "mode": "closed-book"}"#);
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"]["message"].as_str().unwrap().contains("closed-book"));

    let (status, v) = post_raw(&url, r#"{"dataset_path": "/nonexistent/qa.jsonl"}"#);
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["kind"], "data");
}

#[test]
fn concurrent_asks_agree() {
    let f = fixture();
    let question = "How long does the virus remain viable on plastic?";
    let expected = f.engine.answer_question(question, None).unwrap().without_timing();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..8)
            .map(|_| {
                s.spawn(|| {
                    Client::new()
                        .post(format!("{}/ask", f.url))
                        .json(&json!({ "question": question }))
                        .send()
                        .unwrap()
                        .json::<QueryResult>()
                        .unwrap()
                        .without_timing()
                })
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), expected);
        }
    });
}

#[test]
fn static_ui_assets_are_served_alongside_the_api() {
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<html>qa</html>").unwrap();
    let f = fixture_with(Some(ui.path()));
    let page = reqwest::blocking::get(format!("{}/", f.url)).unwrap().text().unwrap();
    assert_eq!(page, "<html>qa</html>");
    let health: Value = reqwest::blocking::get(format!("{}/health", f.url)).unwrap().json().unwrap();
    assert_eq!(health["status"], "ok");
}
