//! Exact top-k retrieval over a trail's reviews, and the per-trail
//! embedding cache that feeds it.

mod cache;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbedError, EmbeddingVector};
use crate::store::{ReviewId, StoreError};

pub use cache::{CacheEntry, CacheStats, ReviewCache, DEFAULT_CACHE_CAPACITY};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("query has dimension {query} but cached vectors have {cached}")]
    DimMismatch { query: usize, cached: usize },
    #[error("k must be at least 1")]
    InvalidK,
}

/// One retrieved review. Lists of hits are sorted by descending score, ties
/// by ascending review id.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub review_id: ReviewId,
    pub score: f64,
}

impl RetrievalHit {
    /// Better hits compare greater. Scores are finite, and `0.0 == -0.0`
    /// must tie, so this is not `total_cmp`.
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.score
            .partial_cmp(&other.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.review_id.cmp(&self.review_id))
    }
}

struct Ranked(RetrievalHit);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

/// The `min(k, n)` best candidates by dot product with `query`.
///
/// Keeps a k-element min-heap, so the cost is `O(n log k)`.
pub fn rank_top_k<'a>(
    query: &EmbeddingVector,
    candidates: impl IntoIterator<Item = (ReviewId, &'a EmbeddingVector)>,
    k: usize,
) -> Result<Vec<RetrievalHit>, IndexError> {
    if k == 0 {
        return Err(IndexError::InvalidK);
    }
    let mut heap: BinaryHeap<Reverse<Ranked>> = BinaryHeap::with_capacity(k + 1);
    for (review_id, v) in candidates {
        if v.dim() != query.dim() {
            return Err(IndexError::DimMismatch { query: query.dim(), cached: v.dim() });
        }
        let hit = Ranked(RetrievalHit { review_id, score: query.dot(v) });
        if heap.len() < k {
            heap.push(Reverse(hit));
        } else if let Some(mut worst) = heap.peek_mut() {
            if hit > worst.0 {
                *worst = Reverse(hit);
            }
        }
    }
    Ok(heap.into_sorted_vec().into_iter().map(|Reverse(Ranked(h))| h).collect())
}
