//! Corpus loading and review cleanup.

mod contractions;
mod import;
mod normalize;
mod relevance;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use contractions::{Contraction, ContractionTable, TableError};
pub use import::{
    import_corpus, import_from_readers, parse_jsonl, parse_reviews, parse_trails, resolve_hint, CorpusSource,
    FilteredReview, IngestError, IngestReport,
};
pub use normalize::{
    expand_contractions, is_emoji, is_forbidden, normalize_review_text, EMOJI_COMPONENTS, EMOJI_RANGES,
};
pub use relevance::{english_score, is_relevant, Rejection, RelevanceConfig};

use crate::store::ReviewSource;

/// A review as it appears in a reviews file, before cleanup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReview {
    pub source: ReviewSource,
    pub trail_name_hint: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<DateTime<Utc>>,
}
