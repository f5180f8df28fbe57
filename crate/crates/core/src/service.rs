//! HTTP API over clarification sessions.
//!
//! | route                             | effect                                   |
//! |-----------------------------------|------------------------------------------|
//! | `POST /api/sessions`              | create; runs the first coder/communicator round |
//! | `GET /api/sessions/{id}`          | snapshot                                 |
//! | `POST /api/sessions/{id}/answers` | record answers, run the next round       |
//! | `POST /api/sessions/{id}/stop`    | end the session (idempotent)             |
//! | `GET /api/health`                 | liveness                                 |
//!
//! Sessions live in memory. A second mutation on a session while one is in
//! flight gets `409`; reads never wait for a mutation. Errors are
//! `{"error": {"code", "message"}}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;
use tower_http::trace::{DefaultMakeSpan, DefaultOnResponse, TraceLayer};
use tracing::{info, Level};

use crate::backend::BackendPair;
use crate::config::SessionConfig;
use crate::error::SessionError;
use crate::prompting::{Answer, AnswerOrigin, QuestionRef};
use crate::session::{
    advance, new_session, record_answers, save_transcript, PendingQuestion, ProblemDescription, RoundReply,
    SessionTranscript,
};

/// Shared server configuration.
#[derive(Clone)]
pub struct ServiceConfig {
    /// Template backends; every session gets fresh instances.
    pub backends: BackendPair,
    pub defaults: SessionConfig,
    /// Write-through directory for transcripts (`<id>.json`).
    pub out_dir: Option<PathBuf>,
    /// Static UI files served from `/`.
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(backends: BackendPair) -> Self {
        ServiceConfig {
            backends,
            defaults: SessionConfig::default(),
            out_dir: None,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
struct SlotState {
    transcript: SessionTranscript,
    pending: Vec<PendingQuestion>,
}

struct SessionSlot {
    state: Mutex<SlotState>,
    /// Held for the whole duration of a mutation.
    busy: Mutex<()>,
    backends: BackendPair,
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<Mutex<HashMap<String, Arc<SessionSlot>>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    fn slot(&self, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
        lock(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn persist(&self, id: &str, transcript: &SessionTranscript) {
        if let Some(dir) = &self.config.out_dir {
            if let Err(e) = transcript.write_to(&dir.join(format!("{id}.json"))) {
                tracing::warn!(session = id, error = %e, "transcript write-through failed");
            }
        }
    }
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

/// Error body `{"error": {"code", "message"}}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no session with id `{id}`"))
    }

    fn from_session(err: SessionError) -> Self {
        match err {
            SessionError::Validation(e) => ApiError::new(StatusCode::BAD_REQUEST, "validation", e.to_string()),
            SessionError::Config(e) => ApiError::new(StatusCode::BAD_REQUEST, "validation", e.to_string()),
            SessionError::NotActive(s) => ApiError::new(
                StatusCode::CONFLICT,
                "not_active",
                format!("session is no longer active (status {s})"),
            ),
            e @ (SessionError::Backend { .. } | SessionError::NoCode) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "backend", e.to_string())
            }
            e @ (SessionError::UnknownQuestion(_) | SessionError::DuplicateAnswer(_)) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown_question", e.to_string())
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

/// Pending question as sent to clients.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PendingView {
    pub question_ref: QuestionRef,
    pub topic: String,
    pub text: String,
    pub source_order: u32,
    pub score: f64,
}

fn view(id: &str, state: &SlotState) -> Value {
    let transcript: Value =
        serde_json::from_slice(&save_transcript(&state.transcript)).expect("transcript document is valid JSON");
    let pending: Vec<PendingView> = state
        .pending
        .iter()
        .map(|p| PendingView {
            question_ref: p.question_ref.clone(),
            topic: p.question.topic.label().to_string(),
            text: p.question.text.clone(),
            source_order: p.question.source_order,
            score: p.question.score,
        })
        .collect();
    json!({
        "session_id": id,
        "status": state.transcript.status,
        "transcript": transcript,
        "pending_questions": pending,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    description: String,
    #[serde(default)]
    config: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerItem {
    question_ref: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    skip: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswersRequest {
    answers: Vec<AnswerItem>,
}

fn merged_config(defaults: &SessionConfig, overrides: Option<Value>) -> Result<SessionConfig, ApiError> {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "validation", m);
    let Some(overrides) = overrides else {
        return Ok(defaults.clone());
    };
    let Value::Object(overrides) = overrides else {
        return Err(bad("config must be an object".into()));
    };
    let mut base = serde_json::to_value(defaults).expect("config serializes");
    if let Value::Object(map) = &mut base {
        map.extend(overrides);
    }
    let config: SessionConfig = serde_json::from_value(base).map_err(|e| bad(format!("invalid config: {e}")))?;
    config.validate().map_err(|e| bad(e.to_string()))?;
    Ok(config)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}

async fn create_session(State(app): State<AppState>, body: Json<Value>) -> Result<Response, ApiError> {
    let req: CreateRequest = serde_json::from_value(body.0)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "validation", e.to_string()))?;
    let desc = ProblemDescription::new(req.description)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "validation", e.to_string()))?;
    let config = merged_config(&app.config.defaults, req.config)?;
    let mut transcript = new_session(desc, config).map_err(ApiError::from_session)?;
    let backends = app.config.backends.fresh();

    let worker = backends.clone();
    let (transcript, pending) =
        blocking(move || advance(&mut transcript, worker.coder(), worker.communicator()).map(|p| (transcript, p)))
            .await?
            .map_err(ApiError::from_session)?;

    let id = uuid::Uuid::new_v4().simple().to_string();
    let state = SlotState { transcript, pending };
    let body = view(&id, &state);
    app.persist(&id, &state.transcript);
    let slot = SessionSlot {
        state: Mutex::new(state),
        busy: Mutex::new(()),
        backends,
    };
    lock(&app.sessions).insert(id.clone(), Arc::new(slot));
    info!(session = %id, "session created");
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let slot = app.slot(&id)?;
    let state = lock(&slot.state).clone();
    Ok(Json(view(&id, &state)))
}

fn busy() -> ApiError {
    ApiError::new(StatusCode::CONFLICT, "busy", "another request is mutating this session")
}

async fn submit_answers(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Json<Value>,
) -> Result<Json<Value>, ApiError> {
    let slot = app.slot(&id)?;
    let req: AnswersRequest = serde_json::from_value(body.0)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "validation", e.to_string()))?;

    let worker = Arc::clone(&slot);
    let state = blocking(move || -> Result<SlotState, ApiError> {
        let _guard = worker.busy.try_lock().map_err(|_| busy())?;
        let mut next = lock(&worker.state).clone();
        if !next.transcript.status.is_active() {
            return Err(ApiError::from_session(SessionError::NotActive(next.transcript.status)));
        }
        let mut answers = Vec::with_capacity(req.answers.len());
        for item in req.answers {
            let question_ref = QuestionRef::from(item.question_ref.as_str());
            let answer = if item.skip {
                Answer::skipped(question_ref)
            } else {
                Answer::new(question_ref, item.text.unwrap_or_default(), AnswerOrigin::Human).map_err(|e| {
                    ApiError::new(
                        StatusCode::UNPROCESSABLE_ENTITY,
                        "validation",
                        format!("{}: {e}", item.question_ref),
                    )
                })?
            };
            answers.push(answer);
        }
        record_answers(&mut next.transcript, &next.pending, RoundReply { answers, stop: false })
            .map_err(ApiError::from_session)?;
        next.pending = advance(
            &mut next.transcript,
            worker.backends.coder(),
            worker.backends.communicator(),
        )
        .map_err(ApiError::from_session)?;
        *lock(&worker.state) = next.clone();
        Ok(next)
    })
    .await??;

    app.persist(&id, &state.transcript);
    Ok(Json(view(&id, &state)))
}

async fn stop_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let slot = app.slot(&id)?;
    let state = {
        let _guard = slot.busy.try_lock().map_err(|_| busy())?;
        let mut state = lock(&slot.state);
        if state.transcript.status.is_active() {
            let pending = std::mem::take(&mut state.pending);
            record_answers(
                &mut state.transcript,
                &pending,
                RoundReply {
                    answers: Vec::new(),
                    stop: true,
                },
            )
            .map_err(ApiError::from_session)?;
        }
        state.clone()
    };
    app.persist(&id, &state.transcript);
    Ok(Json(view(&id, &state)))
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

const INDEX_HTML: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>clarifier</title></head>\
<body><h1>clarifier</h1><p>The web UI is not bundled with this server. Start it with \
<code>--static-dir</code> pointing at the built UI, or use the JSON API under <code>/api</code>.</p></body></html>\n";

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

/// Builds the application router.
pub fn router(state: AppState) -> Router {
    let static_dir = state.config.static_dir.clone();
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/answers", post(submit_answers))
        .route("/api/sessions/{id}/stop", post(stop_session))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(index)),
    };
    app.layer(
        TraceLayer::new_for_http()
            .make_span_with(DefaultMakeSpan::new().level(Level::INFO))
            .on_response(DefaultOnResponse::new().level(Level::INFO)),
    )
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// A server running on a background thread. Shuts down when dropped.
pub struct ServiceHandle {
    addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<std::io::Result<()>>>,
}

impl ServiceHandle {
    /// Binds `addr` (port 0 picks a free port) and starts serving.
    pub fn start(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<ServiceHandle> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let listener = runtime.block_on(tokio::net::TcpListener::bind(addr))?;
        let addr = listener.local_addr()?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let state = AppState::new(config);
        let thread = std::thread::spawn(move || {
            runtime.block_on(serve(listener, state, async {
                let _ = rx.await;
            }))
        });
        Ok(ServiceHandle {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
