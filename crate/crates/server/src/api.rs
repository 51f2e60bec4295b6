use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{middleware, Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};
use trailrag_core::index::CacheStats;
use trailrag_core::ingest::{import_corpus, IngestError, IngestReport, RelevanceConfig};
use trailrag_core::orchestrator::{
    AnswerOptions, Clarification, Engine, EngineError, RouteStats, SessionManager, SourceRef, Timings,
};
use trailrag_core::store::{parse_filter, StoreError};
use trailrag_core::{RouteKind, TrailId};

use crate::log::{request_log, LogSink, RouteInfo};

/// Longest accepted client-chosen session id.
pub const MAX_SESSION_ID_LEN: usize = 128;

pub struct AppState {
    pub engine: Arc<Engine>,
    pub sessions: SessionManager,
    pub admin_enabled: bool,
    pub relevance: RelevanceConfig,
    pub log: LogSink,
}

#[derive(Debug, Deserialize)]
pub struct ChatRequest {
    #[serde(default)]
    pub session_id: Option<String>,
    pub message: String,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub rag: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChatReply {
    pub session_id: String,
    pub answer: String,
    pub route: RouteKind,
    pub route_confidence: f64,
    pub route_rationale: String,
    pub sources: Vec<SourceRef>,
    pub timings: Timings,
    pub k_used: Option<usize>,
    pub clarification: Option<Clarification>,
}

#[derive(Debug, Deserialize)]
pub struct IngestRequest {
    pub trails_path: PathBuf,
    pub reviews_path: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BackendStats {
    pub backend: String,
    pub calls: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StoreStats {
    pub trails: usize,
    pub reviews: usize,
}

#[derive(Debug, Serialize)]
pub struct Stats {
    pub cache: CacheStats,
    pub routes: RouteStats,
    pub sessions: usize,
    pub llm: BackendStats,
    pub embedder: BackendStats,
    pub store: StoreStats,
}

/// Error body shared by every endpoint.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    /// Failing backend, on 503.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    /// Character offset of a filter parse error.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<String>>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { code: code.into(), message: message.into(), ..Default::default() } }
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        if let Some(backend) = e.unavailable_backend() {
            let mut err = ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "backend_unavailable", e.to_string());
            err.body.backend = Some(backend.to_string());
            return err;
        }
        match e {
            EngineError::EmptyQuery => ApiError::bad_request("empty_message", "message is empty"),
            EngineError::InvalidK => ApiError::bad_request("invalid_k", "k must be at least 1"),
            EngineError::Llm { .. } => ApiError::bad_request("prompt_too_large", e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request("invalid_json", format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))
}

async fn chat(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: ChatRequest = parse_body(&body)?;
    if req.message.trim().is_empty() {
        return Err(ApiError::bad_request("empty_message", "message is empty"));
    }
    if req.k == Some(0) {
        return Err(ApiError::bad_request("invalid_k", "k must be at least 1"));
    }
    let session_id = req.session_id.filter(|s| !s.trim().is_empty());
    if session_id.as_ref().is_some_and(|s| s.chars().count() > MAX_SESSION_ID_LEN) {
        return Err(ApiError::bad_request(
            "invalid_session_id",
            format!("session_id is longer than {MAX_SESSION_ID_LEN} characters"),
        ));
    }
    let (session_id, session) = state.sessions.get_or_create(session_id.as_deref());
    let engine = Arc::clone(&state.engine);
    let opts = AnswerOptions { k: req.k, rag_enabled: req.rag };
    let message = req.message;
    let answered = blocking(move || {
        let mut s = session.lock().unwrap_or_else(|e| e.into_inner());
        engine.answer(&message, &mut s, &opts)
    })
    .await??;
    let info = RouteInfo { route: answered.route.kind, timings: answered.timings };
    let reply = ChatReply {
        session_id,
        answer: answered.answer,
        route: answered.route.kind,
        route_confidence: answered.route.confidence,
        route_rationale: answered.route.rationale,
        sources: answered.sources,
        timings: answered.timings,
        k_used: answered.k_used,
        clarification: answered.clarification,
    };
    let mut resp = Json(reply).into_response();
    resp.extensions_mut().insert(info);
    Ok(resp)
}

async fn list_trails(
    State(state): State<Arc<AppState>>,
    params: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::bad_request("invalid_query", e.body_text()))?;
    let filter = parse_filter(params.get("filter").map_or("", String::as_str)).map_err(|e| {
        let mut err = ApiError::bad_request("invalid_filter", e.to_string());
        err.body.position = Some(e.position);
        err.body.expected = Some(e.expected().to_vec()).filter(|v| !v.is_empty());
        err
    })?;
    let limit = match params.get("limit") {
        Some(text) => Some(text.trim().parse::<usize>().map_err(|_| {
            ApiError::bad_request("invalid_limit", format!("limit {text:?} is not a non-negative integer"))
        })?),
        None => None,
    };
    let mut rows = state.engine.store().exec_filter(&filter);
    if let Some(limit) = limit {
        rows.truncate(limit);
    }
    Ok(Json(rows).into_response())
}

async fn trail_reviews(
    State(state): State<Arc<AppState>>,
    id: Result<Path<String>, PathRejection>,
) -> Result<Response, ApiError> {
    let id = id.map(|Path(id)| id).unwrap_or_default();
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, "trail_not_found", format!("no trail with id {id:?}"));
    let trail = id.parse::<u64>().map(TrailId).map_err(|_| not_found())?;
    match state.engine.store().reviews_for_trail(trail) {
        Ok(reviews) => Ok(Json(reviews).into_response()),
        Err(StoreError::TrailNotFound(_)) => Err(not_found()),
        Err(e) => Err(ApiError::internal(e.to_string())),
    }
}

async fn ingest(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    if !state.admin_enabled {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "admin_disabled", "admin endpoints are disabled"));
    }
    let req: IngestRequest = parse_body(&body)?;
    let engine = Arc::clone(&state.engine);
    let relevance = state.relevance.clone();
    let result: Result<IngestReport, IngestError> = blocking(move || {
        let report = import_corpus(&req.trails_path, &req.reviews_path, engine.store(), &relevance)?;
        for trail in &report.affected_trails {
            engine.cache().invalidate(*trail);
        }
        Ok(report)
    })
    .await?;
    match result {
        Ok(report) => Ok(Json(report).into_response()),
        Err(e) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "ingest_failed", format!("{e}"))),
    }
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<Stats> {
    let engine = &state.engine;
    Json(Stats {
        cache: engine.cache().stats(),
        routes: engine.route_stats(),
        sessions: state.sessions.len(),
        llm: BackendStats { backend: engine.llm().name(), calls: engine.llm().call_count() },
        embedder: BackendStats {
            backend: engine.embedder().identity().to_string(),
            calls: engine.embedder().call_count(),
        },
        store: StoreStats { trails: engine.store().trail_count(), reviews: engine.store().review_count() },
    })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this endpoint")
}

fn cors(origins: &[String]) -> CorsLayer {
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Router {
    Router::new()
        .route("/api/chat", post(chat))
        .route("/api/trails", get(list_trails))
        .route("/api/trails/{id}/reviews", get(trail_reviews))
        .route("/api/admin/ingest", post(ingest))
        .route("/api/stats", get(stats))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(middleware::from_fn_with_state(Arc::clone(&state), request_log))
        .layer(cors(cors_origins))
        .with_state(state)
}
