//! HTTP front end over a loaded [`Engine`].
//!
//! | route          | body                                   | response            |
//! |----------------|----------------------------------------|---------------------|
//! | `GET /health`  |                                        | `{"status":"ok"}`   |
//! | `GET /config`  |                                        | active config       |
//! | `POST /ask`    | `{"question": str, "top_n"?: int}`     | `QueryResult`       |
//! | `POST /eval`   | `{"dataset_path": str, "mode"?: str}`  | `EvalReport`        |
//!
//! Errors come back as `{"error": {"kind": .., "message": ..}}`.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;
use tracing::{info, warn};

use litqa::pipeline::{Engine, ErrorClass, EvalMode, PipelineError};

/// Process exit code for a failure class.
pub fn exit_code(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::External => 3,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AskRequest {
    pub question: String,
    #[serde(default)]
    pub top_n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRequest {
    pub dataset_path: String,
    #[serde(default)]
    pub mode: Option<String>,
}

struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            kind: "bad_request",
            message: message.into(),
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let (status, kind) = match e.class() {
            ErrorClass::Usage => (StatusCode::BAD_REQUEST, "usage"),
            ErrorClass::Data => (StatusCode::UNPROCESSABLE_ENTITY, "data"),
            ErrorClass::External => (StatusCode::BAD_GATEWAY, "external"),
        };
        Self {
            status,
            kind,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            warn!(kind = self.kind, "{}", self.message);
        }
        let body = json!({ "error": { "kind": self.kind, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

async fn run_blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, PipelineError> + Send + 'static,
    T: Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(result) => result.map_err(ApiError::from),
        Err(join) => Err(ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            kind: "internal",
            message: join.to_string(),
        }),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn config(State(engine): State<Arc<Engine>>) -> Response {
    Json(engine.config().clone()).into_response()
}

async fn ask(State(engine): State<Arc<Engine>>, body: Bytes) -> Result<Response, ApiError> {
    let req: AskRequest = parse_body(&body)?;
    if req.question.trim().is_empty() {
        return Err(ApiError::bad_request("question is empty"));
    }
    let result = run_blocking(move || engine.answer_question(&req.question, req.top_n)).await?;
    Ok(Json(result).into_response())
}

async fn eval(State(engine): State<Arc<Engine>>, body: Bytes) -> Result<Response, ApiError> {
    let req: EvalRequest = parse_body(&body)?;
    let mode = match req.mode.as_deref() {
        None => EvalMode::Rc,
        Some(m) => m.parse::<EvalMode>().map_err(ApiError::bad_request)?,
    };
    let path = PathBuf::from(req.dataset_path);
    let run = run_blocking(move || engine.run_eval(&path, mode)).await?;
    for d in &run.diagnostics {
        info!("eval: {d}");
    }
    Ok(Json(run.report).into_response())
}

/// The API routes, plus static files from `ui_dir` for every other path when given.
pub fn router(engine: Arc<Engine>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/config", get(config))
        .route("/ask", post(ask))
        .route("/eval", post(eval))
        .with_state(engine);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until ctrl-c.
pub async fn serve(engine: Arc<Engine>, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(engine, ui_dir.as_deref()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
