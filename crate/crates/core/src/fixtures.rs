//! The bundled desk-scale corpus and evaluation fixtures.
//!
//! Ten trails with reviews, a 20-query labeled routing set, 25 evaluation
//! cases and a small mock-model script. Everything is compiled in, so tests
//! and the offline CLI need no files on disk.

use std::sync::Arc;
use std::time::Duration;

use crate::embedding::{Embedder, ReferenceEmbedder};
use crate::eval::{parse_cases, EvalCase, EVAL_EMBEDDER_DIM, EVAL_EMBEDDER_SEED};
use crate::index::ReviewCache;
use crate::ingest::{
    import_from_readers, parse_jsonl, ContractionTable, CorpusSource, IngestError, IngestReport, RelevanceConfig,
};
use crate::llm::{parse_script, LlmGateway, ScriptEntry, ScriptedModel};
use crate::orchestrator::{Engine, EngineConfig};
use crate::router::RoutingCase;
use crate::store::TrailStore;

pub const TRAILS_JSONL: &str = include_str!("../fixtures/trails.jsonl");
pub const REVIEWS_JSONL: &str = include_str!("../fixtures/reviews.jsonl");
pub const ROUTING_JSONL: &str = include_str!("../fixtures/routing.jsonl");
pub const EVAL_CASES_JSONL: &str = include_str!("../fixtures/eval_cases.jsonl");
pub const MOCK_SCRIPT_JSONL: &str = include_str!("../fixtures/mock_script.jsonl");

/// Per-character delay the evaluation gives the mock model.
pub const EVAL_MOCK_DELAY: Duration = Duration::from_micros(100);

/// Import the bundled corpus into `store`.
pub fn load_into(store: &TrailStore) -> IngestReport {
    try_load_into(store).expect("bundled corpus is valid")
}

/// [`load_into`] for stores whose writes can fail (file-backed ones).
pub fn try_load_into(store: &TrailStore) -> Result<IngestReport, IngestError> {
    import_from_readers(
        CorpusSource {
            trails: TRAILS_JSONL.as_bytes(),
            trails_name: "trails.jsonl",
            reviews: REVIEWS_JSONL.as_bytes(),
            reviews_name: "reviews.jsonl",
        },
        store,
        ContractionTable::bundled(),
        &RelevanceConfig::default(),
    )
}

/// A fresh in-memory store holding the bundled corpus.
pub fn bundled_store() -> (TrailStore, IngestReport) {
    let store = TrailStore::in_memory();
    let report = load_into(&store);
    (store, report)
}

pub fn routing_cases() -> Vec<RoutingCase> {
    parse_jsonl(ROUTING_JSONL.as_bytes(), "routing.jsonl")
        .expect("bundled routing fixture is valid")
        .into_iter()
        .map(|(_, c)| c)
        .collect()
}

pub fn eval_cases() -> Vec<EvalCase> {
    parse_cases(EVAL_CASES_JSONL.as_bytes(), "eval_cases.jsonl").expect("bundled eval fixture is valid")
}

pub fn mock_script() -> Vec<ScriptEntry> {
    parse_script(MOCK_SCRIPT_JSONL.as_bytes(), "mock_script.jsonl").expect("bundled script is valid")
}

/// The default evaluation embedder.
pub fn eval_embedder() -> ReferenceEmbedder {
    ReferenceEmbedder::new(EVAL_EMBEDDER_DIM, EVAL_EMBEDDER_SEED)
}

/// Engine over the bundled corpus with the reference embedder and an
/// echoing mock model.
pub fn echo_engine(delay_per_char: Duration, config: EngineConfig) -> Engine {
    let (store, _) = bundled_store();
    engine_with(
        Arc::new(store),
        Arc::new(ReferenceEmbedder::default()),
        ScriptedModel::echo().with_delay(delay_per_char),
        config,
    )
}

pub fn engine_with(
    store: Arc<TrailStore>,
    embedder: Arc<dyn Embedder>,
    model: ScriptedModel,
    config: EngineConfig,
) -> Engine {
    Engine::new(store, Arc::new(ReviewCache::default()), embedder, Arc::new(LlmGateway::new(Box::new(model))), config)
}
