use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use lru::LruCache;
use serde::Serialize;

use super::{rank_top_k, IndexError, RetrievalHit};
use crate::embedding::{embed_batch, BackendIdentity, Embedder, EmbeddingVector};
use crate::store::{Review, TrailId, TrailStore};

pub const DEFAULT_CACHE_CAPACITY: usize = 128;

/// A trail's reviews with their embeddings, index-aligned.
#[derive(Debug)]
pub struct CacheEntry {
    pub trail_id: TrailId,
    pub reviews: Vec<Review>,
    pub vectors: Vec<EmbeddingVector>,
    pub built_with: BackendIdentity,
    pub built_at: DateTime<Utc>,
    /// Review-set fingerprint observed before the reviews were read.
    pub fingerprint: u64,
}

impl CacheEntry {
    fn is_valid(&self, fingerprint: u64, identity: &BackendIdentity) -> bool {
        self.fingerprint == fingerprint && &self.built_with == identity
    }

    pub fn review(&self, id: crate::store::ReviewId) -> Option<&Review> {
        self.reviews.iter().find(|r| r.id == id)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
    pub retrievals: u64,
    pub entries: usize,
    pub capacity: usize,
}

/// Holds at most one built entry; its mutex makes concurrent misses on the
/// same trail wait for a single builder.
#[derive(Default)]
struct Slot(Mutex<Option<Arc<CacheEntry>>>);

/// LRU cache of per-trail review embeddings.
pub struct ReviewCache {
    slots: Mutex<LruCache<TrailId, Arc<Slot>>>,
    capacity: usize,
    hits: AtomicU64,
    misses: AtomicU64,
    evictions: AtomicU64,
    retrievals: AtomicU64,
}

impl Default for ReviewCache {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_CAPACITY)
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl ReviewCache {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self {
            slots: Mutex::new(LruCache::new(NonZeroUsize::new(capacity).expect("capacity >= 1"))),
            capacity,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            evictions: AtomicU64::new(0),
            retrievals: AtomicU64::new(0),
        }
    }

    fn slot(&self, trail: TrailId) -> Arc<Slot> {
        let mut slots = lock(&self.slots);
        if let Some(s) = slots.get(&trail) {
            return Arc::clone(s);
        }
        let s = Arc::new(Slot::default());
        if let Some((evicted, _)) = slots.push(trail, Arc::clone(&s)) {
            if evicted != trail {
                self.evictions.fetch_add(1, Ordering::Relaxed);
            }
        }
        s
    }

    /// Return a valid entry for `trail`, building it if it is missing, was
    /// built by a different backend, or the trail's reviews changed.
    pub fn warm(
        &self,
        trail: TrailId,
        store: &TrailStore,
        backend: &dyn Embedder,
    ) -> Result<Arc<CacheEntry>, IndexError> {
        let fingerprint = store.review_fingerprint(trail)?;
        let slot = self.slot(trail);
        let mut guard = lock(&slot.0);
        if let Some(entry) = guard.as_ref() {
            if entry.is_valid(fingerprint, &backend.identity()) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(Arc::clone(entry));
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        *guard = None;
        let reviews = store.reviews_for_trail(trail)?;
        let texts: Vec<&str> = reviews.iter().map(|r| r.text.as_str()).collect();
        let vectors = embed_batch(backend, &texts)?;
        let entry = Arc::new(CacheEntry {
            trail_id: trail,
            reviews,
            vectors,
            // taken after embedding so a backend that learns its dimension
            // on first use reports the final identity
            built_with: backend.identity(),
            built_at: Utc::now(),
            fingerprint,
        });
        *guard = Some(Arc::clone(&entry));
        Ok(entry)
    }

    /// Drop the entry for `trail`, if any.
    pub fn invalidate(&self, trail: TrailId) {
        lock(&self.slots).pop(&trail);
    }

    pub fn clear(&self) {
        lock(&self.slots).clear();
    }

    /// Warm `trail` and rank its reviews against `query`.
    pub fn retrieve(
        &self,
        query: &EmbeddingVector,
        trail: TrailId,
        k: usize,
        store: &TrailStore,
        backend: &dyn Embedder,
    ) -> Result<(Arc<CacheEntry>, Vec<RetrievalHit>), IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        self.retrievals.fetch_add(1, Ordering::Relaxed);
        let entry = self.warm(trail, store, backend)?;
        let hits = rank_top_k(query, entry.reviews.iter().map(|r| r.id).zip(entry.vectors.iter()), k)?;
        Ok((entry, hits))
    }

    pub fn top_k(
        &self,
        query: &EmbeddingVector,
        trail: TrailId,
        k: usize,
        store: &TrailStore,
        backend: &dyn Embedder,
    ) -> Result<Vec<RetrievalHit>, IndexError> {
        self.retrieve(query, trail, k, store, backend).map(|(_, hits)| hits)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            evictions: self.evictions.load(Ordering::Relaxed),
            retrievals: self.retrievals.load(Ordering::Relaxed),
            entries: lock(&self.slots).len(),
            capacity: self.capacity,
        }
    }
}
