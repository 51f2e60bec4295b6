//! Trail recommendation engine with review retrieval.
//!
//! The crate is organised along the request path:
//!
//! - [`ingest`] loads trails and reviews from JSON-lines files and cleans
//!   review text before it is stored.
//! - [`store`] holds trails and reviews and answers structured questions
//!   through a small filter-expression language.
//! - [`embedding`] turns text into unit-norm vectors, either with the
//!   built-in trigram hasher or a remote HTTP model.
//! - [`index`] ranks a trail's reviews against a query vector and caches
//!   per-trail review embeddings.
//! - [`router`] decides which answer path a question takes.
//! - [`llm`] builds prompts and talks to a chat model (remote or scripted).
//! - [`orchestrator`] wires the above into a single `answer` call.
//! - [`eval`] scores answers against ground truth and sweeps `k`.

pub mod embedding;
pub mod eval;
pub mod fixtures;
pub mod index;
pub mod ingest;
pub mod llm;
pub mod orchestrator;
pub mod router;
pub mod store;
mod sync;

pub use embedding::{Embedder, EmbeddingVector, ReferenceEmbedder};
pub use index::{RetrievalHit, ReviewCache};
pub use orchestrator::{ChatResponse, Engine, EngineConfig, SessionState};
pub use router::{QueryRoute, RouteKind};
pub use store::{Review, ReviewId, TrailId, TrailRecord, TrailStore};
