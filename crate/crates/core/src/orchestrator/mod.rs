//! The answer pipeline: route, gather context, ask the model, report
//! provenance and timings.

mod constraints;
mod resolve;
mod session;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{embed, EmbedError, Embedder, EmbeddingVector};
use crate::index::{IndexError, ReviewCache};
use crate::llm::{
    build_all_reviews_prompt, build_rag_prompt, build_recommendation_prompt, build_structured_prompt, LlmError,
    LlmGateway, PromptBundle, Provenance, Role, Turn,
};
use crate::router::{classify, QueryRoute, RouteKind};
use crate::store::dsl::{parse_filter, schema_fields, FilterExpr};
use crate::store::{ReviewId, StoreError, TrailId, TrailRecord, TrailStore};

pub use constraints::{constraint_filter, constraint_filter_text};
pub use resolve::{resolve_trail_mention, Candidate, TrailMention, FUZZY_THRESHOLD};
pub use session::{SessionManager, SessionState, DEFAULT_HISTORY_TURNS, DEFAULT_SESSION_TTL};

pub const DEFAULT_K: usize = 5;
const SNIPPET_CHARS: usize = 160;

/// Who writes the filter expression on the structured path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterSource {
    #[default]
    Rules,
    Model,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub k: usize,
    pub rag_enabled: bool,
    pub filter_source: FilterSource,
    /// Ask the model to route instead of using only the rules.
    pub llm_routing: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { k: DEFAULT_K, rag_enabled: true, filter_source: FilterSource::Rules, llm_routing: false }
    }
}

/// Per-request overrides of [`EngineConfig`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AnswerOptions {
    pub k: Option<usize>,
    pub rag_enabled: Option<bool>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("{backend}: {source}")]
    Llm {
        backend: String,
        #[source]
        source: LlmError,
    },
    #[error("{backend}: {source}")]
    Embed {
        backend: String,
        #[source]
        source: EmbedError,
    },
    #[error(transparent)]
    Index(IndexError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl EngineError {
    /// Name of the backend that failed, when the error is a backend outage
    /// rather than a bad request or bad data.
    pub fn unavailable_backend(&self) -> Option<&str> {
        match self {
            EngineError::Llm { backend, source } => match source {
                LlmError::PromptTooLarge { .. } => None,
                _ => Some(backend),
            },
            EngineError::Embed { backend, source } if source.is_backend_failure() => Some(backend),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceRef {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub review_id: Option<ReviewId>,
    pub trail_id: TrailId,
    pub snippet: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub route_ms: f64,
    pub retrieve_ms: f64,
    pub llm_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clarification {
    /// Closest trail names, best first; may be empty.
    pub candidates: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub answer: String,
    pub route: QueryRoute,
    /// Exactly the items placed in the model's context.
    pub sources: Vec<SourceRef>,
    pub timings: Timings,
    pub k_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clarification: Option<Clarification>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteStats {
    pub recommendation: u64,
    pub structured: u64,
    pub review_rag: u64,
    pub out_of_scope: u64,
    pub clarifications: u64,
    pub filter_retries: u64,
    pub filter_fallbacks: u64,
}

#[derive(Default)]
struct RouteCounters {
    by_kind: [AtomicU64; 4],
    clarifications: AtomicU64,
    filter_retries: AtomicU64,
    filter_fallbacks: AtomicU64,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

fn snippet(text: &str) -> String {
    match text.char_indices().nth(SNIPPET_CHARS) {
        Some((at, _)) => format!("{}…", &text[..at]),
        None => text.to_string(),
    }
}

/// Lowercase with whitespace collapsed; the key for per-session query
/// vector reuse.
fn normalize_query(q: &str) -> String {
    q.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

const OUT_OF_SCOPE_ANSWER: &str = "I can help with trail questions: ask about a trail's length, difficulty, \
pets or accessibility, what visitors say about it, or for a recommendation.";

const FILTER_SYSTEM: &str = "Translate the question into one filter expression for the trail table and \
reply with the expression only. Grammar: comparisons `field op value` joined with AND, OR, NOT and \
parentheses; `activities HAS \"biking\"`; optional `ORDER BY field ASC|DESC` and `LIMIT n`. Strings are \
double quoted. Reply with nothing for no constraint.";

/// What the structured or recommendation path produced.
struct Gathered {
    bundle: PromptBundle,
    k_used: Option<usize>,
}

pub struct Engine {
    store: Arc<TrailStore>,
    cache: Arc<ReviewCache>,
    embedder: Arc<dyn Embedder>,
    llm: Arc<LlmGateway>,
    config: EngineConfig,
    counters: RouteCounters,
}

impl Engine {
    pub fn new(
        store: Arc<TrailStore>,
        cache: Arc<ReviewCache>,
        embedder: Arc<dyn Embedder>,
        llm: Arc<LlmGateway>,
        config: EngineConfig,
    ) -> Self {
        Self { store, cache, embedder, llm, config, counters: RouteCounters::default() }
    }

    pub fn store(&self) -> &Arc<TrailStore> {
        &self.store
    }

    pub fn cache(&self) -> &Arc<ReviewCache> {
        &self.cache
    }

    pub fn embedder(&self) -> &Arc<dyn Embedder> {
        &self.embedder
    }

    pub fn llm(&self) -> &Arc<LlmGateway> {
        &self.llm
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn route_stats(&self) -> RouteStats {
        let c = &self.counters;
        let get = |a: &AtomicU64| a.load(Ordering::Relaxed);
        RouteStats {
            recommendation: get(&c.by_kind[0]),
            structured: get(&c.by_kind[1]),
            review_rag: get(&c.by_kind[2]),
            out_of_scope: get(&c.by_kind[3]),
            clarifications: get(&c.clarifications),
            filter_retries: get(&c.filter_retries),
            filter_fallbacks: get(&c.filter_fallbacks),
        }
    }

    pub fn route(&self, query: &str) -> QueryRoute {
        let llm = self.config.llm_routing.then_some(&*self.llm);
        classify(query, &schema_fields(), llm)
    }

    /// Answer one question within a session and record the exchange in its
    /// history.
    pub fn answer(
        &self,
        query: &str,
        session: &mut SessionState,
        opts: &AnswerOptions,
    ) -> Result<ChatResponse, EngineError> {
        let start = Instant::now();
        let query = query.trim();
        if query.is_empty() {
            return Err(EngineError::EmptyQuery);
        }
        let k = opts.k.unwrap_or(self.config.k);
        if k == 0 {
            return Err(EngineError::InvalidK);
        }
        let rag_enabled = opts.rag_enabled.unwrap_or(self.config.rag_enabled);

        let route = self.route(query);
        let kind_index = RouteKind::ALL.iter().position(|k| *k == route.kind).expect("listed");
        self.counters.by_kind[kind_index].fetch_add(1, Ordering::Relaxed);
        let mut timings = Timings { route_ms: ms(start), ..Timings::default() };

        let history = session.history();
        let retrieve_start = Instant::now();
        let gathered = match route.kind {
            RouteKind::OutOfScope => None,
            RouteKind::Structured => {
                let filter = self.structured_filter(query, &history)?;
                let rows = self.store.exec_filter(&filter);
                Some(Gathered {
                    bundle: build_structured_prompt(&rows, query, &history, self.llm.prompt_limit()),
                    k_used: None,
                })
            }
            RouteKind::Recommendation => {
                let trails = self.store.trails();
                let filter = constraint_filter(query, &trails, false).unwrap_or_else(|_| FilterExpr::match_all());
                let rows = self.store.exec_filter(&filter);
                Some(Gathered {
                    bundle: build_recommendation_prompt(&rows, query, &history, self.llm.prompt_limit()),
                    k_used: None,
                })
            }
            RouteKind::ReviewRag => match resolve_trail_mention(query, &self.store.trails()) {
                TrailMention::Found(trail) => {
                    Some(self.gather_reviews(&trail, query, &history, session, k, rag_enabled)?)
                }
                TrailMention::Candidates(candidates) => {
                    self.counters.clarifications.fetch_add(1, Ordering::Relaxed);
                    timings.retrieve_ms = ms(retrieve_start);
                    let names: Vec<String> = candidates.into_iter().map(|c| c.name).collect();
                    let answer = clarification_text(&names, &self.store.trails());
                    timings.total_ms = ms(start);
                    record(session, query, &answer);
                    return Ok(ChatResponse {
                        answer,
                        route,
                        sources: vec![],
                        timings,
                        k_used: None,
                        clarification: Some(Clarification { candidates: names }),
                    });
                }
            },
        };
        timings.retrieve_ms = ms(retrieve_start);

        let Some(Gathered { bundle, k_used }) = gathered else {
            timings.total_ms = ms(start);
            record(session, query, OUT_OF_SCOPE_ANSWER);
            return Ok(ChatResponse {
                answer: OUT_OF_SCOPE_ANSWER.into(),
                route,
                sources: vec![],
                timings,
                k_used: None,
                clarification: None,
            });
        };

        let llm_start = Instant::now();
        let answer = self.complete(&bundle)?;
        timings.llm_ms = ms(llm_start);
        let sources = self.sources(&bundle.provenance)?;
        timings.total_ms = ms(start);
        record(session, query, &answer);
        Ok(ChatResponse { answer, route, sources, timings, k_used, clarification: None })
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, EngineError> {
        self.llm.complete(bundle).map_err(|source| EngineError::Llm { backend: self.llm.name(), source })
    }

    fn embed_error(&self, source: EmbedError) -> EngineError {
        EngineError::Embed { backend: self.embedder.identity().to_string(), source }
    }

    fn index_error(&self, e: IndexError) -> EngineError {
        match e {
            IndexError::Embed(source) => self.embed_error(source),
            IndexError::Store(s) => EngineError::Store(s),
            other => EngineError::Index(other),
        }
    }

    fn query_vector(&self, query: &str, session: &mut SessionState) -> Result<EmbeddingVector, EngineError> {
        let normalized = normalize_query(query);
        let key = format!("{}\u{0}{normalized}", self.embedder.identity());
        if let Some(v) = session.memo(&key) {
            return Ok(v.clone());
        }
        let v = embed(&*self.embedder, &normalized).map_err(|e| self.embed_error(e))?;
        session.remember(key, v.clone());
        Ok(v)
    }

    fn gather_reviews(
        &self,
        trail: &TrailRecord,
        query: &str,
        history: &[Turn],
        session: &mut SessionState,
        k: usize,
        rag_enabled: bool,
    ) -> Result<Gathered, EngineError> {
        let limit = self.llm.prompt_limit();
        if !rag_enabled {
            let reviews = self.store.reviews_for_trail(trail.id)?;
            return Ok(Gathered {
                bundle: build_all_reviews_prompt(trail.id, &reviews, query, history, limit),
                k_used: None,
            });
        }
        let q = self.query_vector(query, session)?;
        let (entry, hits) =
            self.cache.retrieve(&q, trail.id, k, &self.store, &*self.embedder).map_err(|e| self.index_error(e))?;
        Ok(Gathered {
            bundle: build_rag_prompt(trail.id, &hits, &entry.reviews, query, history, limit),
            k_used: Some(k),
        })
    }

    /// Filter for the structured path: from the rules, or from the model with
    /// one corrective retry and a match-all fallback.
    fn structured_filter(&self, query: &str, history: &[Turn]) -> Result<FilterExpr, EngineError> {
        let trails = self.store.trails();
        if self.config.filter_source == FilterSource::Rules {
            return Ok(constraint_filter(query, &trails, true).unwrap_or_else(|_| FilterExpr::match_all()));
        }
        let mut question = query.to_string();
        for attempt in 0..2 {
            let bundle = PromptBundle {
                system: FILTER_SYSTEM.into(),
                context: format!("Fields: {}", schema_fields().join(", ")),
                question: question.clone(),
                history: history.to_vec(),
                provenance: Provenance::None,
            };
            let reply = self.complete(&bundle)?;
            let text = reply.trim().trim_matches('`').trim();
            match parse_filter(text) {
                Ok(f) => return Ok(f),
                Err(e) if attempt == 0 => {
                    self.counters.filter_retries.fetch_add(1, Ordering::Relaxed);
                    question = format!("{query}\n\nYour previous expression `{text}` was rejected: {e}. Reply with a corrected expression.");
                }
                Err(_) => {}
            }
        }
        self.counters.filter_fallbacks.fetch_add(1, Ordering::Relaxed);
        Ok(FilterExpr::match_all())
    }

    fn sources(&self, provenance: &Provenance) -> Result<Vec<SourceRef>, EngineError> {
        Ok(match provenance {
            Provenance::None => vec![],
            Provenance::Structured { trail_ids } => trail_ids
                .iter()
                .filter_map(|id| self.store.get_trail(*id))
                .map(|t| SourceRef { review_id: None, trail_id: t.id, snippet: t.name })
                .collect(),
            Provenance::Reviews { trail_id, review_ids } => {
                let reviews = self.store.reviews_for_trail(*trail_id)?;
                review_ids
                    .iter()
                    .map(|id| SourceRef {
                        review_id: Some(*id),
                        trail_id: *trail_id,
                        snippet: reviews.iter().find(|r| r.id == *id).map(|r| snippet(&r.text)).unwrap_or_default(),
                    })
                    .collect()
            }
        })
    }
}

fn record(session: &mut SessionState, query: &str, answer: &str) {
    session.push(Turn { role: Role::User, text: query.into() });
    session.push(Turn { role: Role::Assistant, text: answer.into() });
}

fn clarification_text(candidates: &[String], trails: &[TrailRecord]) -> String {
    if candidates.is_empty() {
        let known: Vec<&str> = trails.iter().take(5).map(|t| t.name.as_str()).collect();
        if known.is_empty() {
            return "I could not tell which trail you mean, and no trails are loaded yet.".into();
        }
        return format!("I could not tell which trail you mean. Try naming one, for example: {}.", known.join(", "));
    }
    format!("Which trail do you mean? Closest matches: {}.", candidates.join(", "))
}
