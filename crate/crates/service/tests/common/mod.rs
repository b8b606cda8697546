#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axum::Router;

/// Serves `router` on an ephemeral port from a background thread and returns its base URL.
pub fn spawn_stub(router: Router) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

pub fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn golden_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Runs the `qa` binary with the endpoint overrides cleared.
pub fn qa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qa"))
        .args(args)
        .env_remove("QA_EMBED_ENDPOINT")
        .env_remove("QA_READER_ENDPOINT")
        .output()
        .expect("qa binary runs")
}

pub fn qa_ok(args: &[&str]) -> Vec<u8> {
    let out = qa(args);
    assert!(
        out.status.success(),
        "qa {args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}
