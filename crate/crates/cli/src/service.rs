//! HTTP annotation service.
//!
//! `POST /annotate` takes `{"text": ..., "language"?: ..., "id"?: ...}` and
//! returns the annotated record, serialized exactly as `edl annotate` prints
//! it. `GET /health` reports engine statistics. Both answer 503 until the
//! engine has finished loading.

use std::net::SocketAddr;
use std::sync::{Arc, OnceLock};

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use edl_core::record::InputDocument;
use edl_core::{EdlError, Engine};
use serde_json::json;
use tokio::sync::Semaphore;

use crate::commands::ServeArgs;
use crate::GlobalArgs;

#[derive(Clone)]
pub struct ServiceState {
    engine: Arc<OnceLock<Arc<Engine>>>,
    permits: Arc<Semaphore>,
    workers: usize,
}

impl ServiceState {
    /// A service that answers 503 until [`ServiceState::set_engine`] is called.
    pub fn loading(workers: usize) -> Self {
        let workers = workers.max(1);
        ServiceState {
            engine: Arc::new(OnceLock::new()),
            permits: Arc::new(Semaphore::new(workers)),
            workers,
        }
    }

    pub fn ready(engine: Engine, workers: usize) -> Self {
        let state = Self::loading(workers);
        state.set_engine(engine);
        state
    }

    pub fn set_engine(&self, engine: Engine) {
        let _ = self.engine.set(Arc::new(engine));
    }

    fn engine(&self) -> Option<Arc<Engine>> {
        self.engine.get().cloned()
    }
}

pub fn router(state: ServiceState) -> Router {
    Router::new()
        .route("/annotate", post(annotate))
        .route("/health", get(health))
        .with_state(state)
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    json_response(status, json!({ "error": message.into() }).to_string())
}

fn not_ready() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, "engine is loading")
}

async fn annotate(State(state): State<ServiceState>, body: Bytes) -> Response {
    let Some(engine) = state.engine() else {
        return not_ready();
    };
    if body.iter().all(u8::is_ascii_whitespace) {
        return error(StatusCode::BAD_REQUEST, "empty request body");
    }
    let doc: InputDocument = match serde_json::from_slice(&body) {
        Ok(d) => d,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("invalid request: {e}")),
    };
    let Ok(_permit) = state.permits.acquire().await else {
        return not_ready();
    };
    let outcome = tokio::task::spawn_blocking(move || engine.annotate_document(&doc)).await;
    match outcome {
        Ok(Ok(record)) => json_response(StatusCode::OK, record.to_json_line()),
        Ok(Err(e @ (EdlError::UnsupportedLanguage(_) | EdlError::NoProfiles))) => {
            error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
        }
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("annotation task failed: {e}")),
    }
}

async fn health(State(state): State<ServiceState>) -> Response {
    match state.engine() {
        Some(engine) => json_response(
            StatusCode::OK,
            json!({ "status": "ok", "workers": state.workers, "engine": engine.stats() }).to_string(),
        ),
        None => json_response(StatusCode::SERVICE_UNAVAILABLE, json!({ "status": "loading" }).to_string()),
    }
}

pub fn serve(g: &GlobalArgs, args: &ServeArgs) -> anyhow::Result<()> {
    let config = g.engine_config()?;
    config.check_paths()?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("invalid address {}:{}", args.host, args.port))?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(config.workers.max(1))
        .enable_all()
        .build()
        .context("starting runtime")?;
    runtime.block_on(async move {
        let state = ServiceState::loading(config.workers);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        log::info!("listening on http://{addr}");
        let loader = state.clone();
        tokio::task::spawn_blocking(move || match config.build_engine() {
            Ok(engine) => {
                log::info!("engine ready: {} entities", engine.stats().entities);
                loader.set_engine(engine);
            }
            Err(e) => {
                log::error!("engine failed to load: {e}");
                std::process::exit(2);
            }
        });
        axum::serve(listener, router(state)).await.context("serving")
    })
}
