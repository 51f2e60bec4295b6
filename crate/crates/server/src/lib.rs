//! HTTP front end for the trail recommendation engine.
//!
//! Endpoints:
//!
//! | method | path                         | body / query                     |
//! |--------|------------------------------|----------------------------------|
//! | POST   | `/api/chat`                  | `{session_id?, message, k?, rag?}` |
//! | GET    | `/api/trails`                | `?filter=<dsl>&limit=<n>`        |
//! | GET    | `/api/trails/{id}/reviews`   |                                  |
//! | POST   | `/api/admin/ingest`          | `{trails_path, reviews_path}`    |
//! | GET    | `/api/stats`                 |                                  |
//!
//! Response bodies are described by the JSON schemas in `schemas/`, also
//! available as [`schemas::ALL`].

pub mod api;
pub mod cli;
pub mod config;
pub mod log;
pub mod schemas;

use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;
use trailrag_core::embedding::{Embedder, RemoteEmbedder, RemoteEmbedderConfig};
use trailrag_core::fixtures;
use trailrag_core::index::ReviewCache;
use trailrag_core::ingest::{IngestError, RelevanceConfig};
use trailrag_core::llm::{
    parse_script_file, LanguageModel, LlmGateway, RemoteChatConfig, RemoteChatModel, ScriptedModel,
};
use trailrag_core::orchestrator::{Engine, EngineConfig, SessionManager, DEFAULT_HISTORY_TURNS};
use trailrag_core::store::{FileStorage, StoreError, TrailStore};
use trailrag_core::ReferenceEmbedder;

pub use api::{router, AppState};
pub use config::{ConfigError, ConfigLayer, ServerConfig};
pub use log::LogSink;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("store: {0}")]
    Store(#[from] StoreError),
    #[error("mock script: {0}")]
    Script(IngestError),
    #[error("bundled corpus: {0}")]
    Fixture(IngestError),
}

/// Open the configured store, importing the bundled corpus when it is empty
/// and `load_fixture` is set.
pub fn open_store(cfg: &ServerConfig) -> Result<TrailStore, StartupError> {
    let store = match &cfg.store_path {
        Some(p) => TrailStore::open(Box::new(FileStorage::new(p)))?,
        None => TrailStore::in_memory(),
    };
    if cfg.load_fixture && store.trail_count() == 0 {
        fixtures::try_load_into(&store).map_err(StartupError::Fixture)?;
    }
    Ok(store)
}

pub fn build_embedder(cfg: &ServerConfig) -> Arc<dyn Embedder> {
    match &cfg.embedder_endpoint {
        Some(endpoint) => {
            let mut rc = RemoteEmbedderConfig::new(endpoint.clone(), cfg.embedder_model.clone());
            rc.timeout = Duration::from_secs(cfg.embedder_timeout_secs);
            Arc::new(RemoteEmbedder::new(rc))
        }
        None => Arc::new(ReferenceEmbedder::default()),
    }
}

/// The embedder that scores evaluation answers; never the retrieval one.
pub fn build_eval_embedder(cfg: &ServerConfig) -> Arc<dyn Embedder> {
    match &cfg.eval_embedder_endpoint {
        Some(endpoint) => {
            let mut rc = RemoteEmbedderConfig::new(endpoint.clone(), cfg.embedder_model.clone());
            rc.timeout = Duration::from_secs(cfg.embedder_timeout_secs);
            Arc::new(RemoteEmbedder::new(rc))
        }
        None => Arc::new(fixtures::eval_embedder()),
    }
}

pub fn build_llm(cfg: &ServerConfig) -> Result<Box<dyn LanguageModel>, StartupError> {
    if let Some(endpoint) = &cfg.llm_endpoint {
        let mut rc = RemoteChatConfig::new(endpoint.clone(), cfg.llm_model.clone());
        rc.timeout = Duration::from_secs(cfg.llm_timeout_secs);
        return Ok(Box::new(RemoteChatModel::new(rc)));
    }
    let model = match &cfg.mock_script {
        Some(p) => ScriptedModel::scripted(parse_script_file(p).map_err(StartupError::Script)?),
        None => ScriptedModel::echo(),
    };
    Ok(Box::new(model.with_delay(Duration::from_micros(cfg.mock_delay_us))))
}

pub fn build_engine(cfg: &ServerConfig) -> Result<Engine, StartupError> {
    cfg.validate()?;
    let store = open_store(cfg)?;
    Ok(Engine::new(
        Arc::new(store),
        Arc::new(ReviewCache::new(cfg.cache_capacity)),
        build_embedder(cfg),
        Arc::new(LlmGateway::new(build_llm(cfg)?)),
        EngineConfig {
            k: cfg.default_k,
            rag_enabled: cfg.rag_enabled,
            llm_routing: cfg.llm_routing,
            ..EngineConfig::default()
        },
    ))
}

pub fn build_state(cfg: &ServerConfig, log: LogSink) -> Result<AppState, StartupError> {
    Ok(AppState {
        engine: Arc::new(build_engine(cfg)?),
        sessions: SessionManager::new(cfg.session_ttl(), DEFAULT_HISTORY_TURNS),
        admin_enabled: cfg.admin_enabled,
        relevance: RelevanceConfig::default(),
        log,
    })
}

/// Serve `app` until `shutdown` resolves, then give in-flight requests up to
/// `grace` to finish. Returns `false` if the drain timed out.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: axum::Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
    grace: Duration,
) -> std::io::Result<bool> {
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let server = axum::serve(listener, app).with_graceful_shutdown(async move {
        let _ = rx.await;
    });
    let mut handle = tokio::spawn(async move { server.await });
    tokio::select! {
        res = &mut handle => return res.map_err(std::io::Error::other)?.map(|_| true),
        _ = shutdown => {}
    }
    let _ = tx.send(());
    match tokio::time::timeout(grace, &mut handle).await {
        Ok(res) => res.map_err(std::io::Error::other)?.map(|_| true),
        Err(_) => {
            handle.abort();
            Ok(false)
        }
    }
}

/// Resolves on Ctrl-C or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
