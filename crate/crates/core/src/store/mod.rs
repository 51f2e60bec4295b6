//! Structured trail and review store.
//!
//! Readers work on an immutable snapshot (`Arc<Tables>`) so a filter always
//! sees a consistent view. Writers are serialised; each write clones the
//! current tables, applies one change, persists it and only then publishes
//! the new snapshot, so a failed save leaves the visible state untouched.

pub mod dsl;
mod storage;
mod types;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use thiserror::Error;

pub use dsl::{parse_filter, FilterExpr};
pub use storage::{FileStorage, MemoryStorage, Snapshot, Storage, SNAPSHOT_VERSION};
pub use types::*;

use crate::ingest::{normalize_review_text, ContractionTable};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("trail {0} not found")]
    TrailNotFound(TrailId),
    #[error("review {0} not found")]
    ReviewNotFound(ReviewId),
    #[error("trail {trail} still has {count} review(s); delete them first")]
    TrailHasReviews { trail: TrailId, count: usize },
    #[error("storage I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt store: {0}")]
    Corrupt(String),
}

#[derive(Clone, Debug, Default)]
struct Tables {
    trails: BTreeMap<TrailId, TrailRecord>,
    /// Lowercased name -> id; names are unique case-insensitively.
    names: HashMap<String, TrailId>,
    reviews: BTreeMap<ReviewId, Review>,
    by_trail: HashMap<TrailId, BTreeSet<ReviewId>>,
    last_trail: u64,
    last_review: u64,
}

impl Tables {
    fn snapshot(&self) -> Snapshot {
        Snapshot {
            version: SNAPSHOT_VERSION,
            last_trail_id: self.last_trail,
            last_review_id: self.last_review,
            trails: self.trails.values().cloned().collect(),
            reviews: self.reviews.values().cloned().collect(),
        }
    }

    fn from_snapshot(snap: Snapshot) -> Result<Self, StoreError> {
        let mut t = Tables { last_trail: snap.last_trail_id, last_review: snap.last_review_id, ..Default::default() };
        for trail in snap.trails {
            trail.validate()?;
            let key = trail.name.to_lowercase();
            if t.names.insert(key, trail.id).is_some() {
                return Err(StoreError::Corrupt(format!("duplicate trail name {:?}", trail.name)));
            }
            t.last_trail = t.last_trail.max(trail.id.0);
            t.trails.insert(trail.id, trail);
        }
        for review in snap.reviews {
            if !t.trails.contains_key(&review.trail_id) {
                return Err(StoreError::Corrupt(format!(
                    "review {} references missing trail {}",
                    review.id, review.trail_id
                )));
            }
            t.last_review = t.last_review.max(review.id.0);
            t.by_trail.entry(review.trail_id).or_default().insert(review.id);
            t.reviews.insert(review.id, review);
        }
        Ok(t)
    }
}

/// Operation counters, used by the server's stats endpoint and by tests
/// that check which store paths a request touched.
#[derive(Debug, Default)]
pub struct StoreMetrics {
    pub filter_execs: AtomicU64,
    pub review_reads: AtomicU64,
}

pub struct TrailStore {
    tables: RwLock<Arc<Tables>>,
    writer: Mutex<()>,
    importer: Mutex<()>,
    storage: Box<dyn Storage>,
    contractions: ContractionTable,
    metrics: StoreMetrics,
}

impl TrailStore {
    /// Volatile store, used by tests and the offline CLI.
    pub fn in_memory() -> Self {
        Self::open(Box::new(MemoryStorage::default())).expect("memory storage cannot fail")
    }

    pub fn open(storage: Box<dyn Storage>) -> Result<Self, StoreError> {
        let tables = match storage.load()? {
            Some(snap) => Tables::from_snapshot(snap)?,
            None => Tables::default(),
        };
        Ok(Self {
            tables: RwLock::new(Arc::new(tables)),
            writer: Mutex::new(()),
            importer: Mutex::new(()),
            storage,
            contractions: ContractionTable::bundled().clone(),
            metrics: StoreMetrics::default(),
        })
    }

    fn read(&self) -> Arc<Tables> {
        self.tables.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn write<R>(&self, f: impl FnOnce(&mut Tables) -> Result<R, StoreError>) -> Result<R, StoreError> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = (*self.read()).clone();
        let out = f(&mut next)?;
        self.storage.save(&next.snapshot())?;
        *self.tables.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(out)
    }

    /// Held for the duration of a corpus import; imports do not overlap.
    pub fn import_guard(&self) -> std::sync::MutexGuard<'_, ()> {
        self.importer.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn metrics(&self) -> &StoreMetrics {
        &self.metrics
    }

    /// Insert a trail, or replace the trail with the same (case-insensitive)
    /// name while keeping its id.
    pub fn upsert_trail(&self, mut trail: TrailRecord) -> Result<TrailId, StoreError> {
        trail.validate()?;
        self.write(|t| {
            let key = trail.name.to_lowercase();
            let id = match t.names.get(&key) {
                Some(&id) => id,
                None => {
                    t.last_trail += 1;
                    let id = TrailId(t.last_trail);
                    t.names.insert(key, id);
                    id
                }
            };
            trail.id = id;
            t.trails.insert(id, trail);
            Ok(id)
        })
    }

    /// Refuses while the trail still has reviews.
    pub fn delete_trail(&self, id: TrailId) -> Result<(), StoreError> {
        self.write(|t| {
            let trail = t.trails.get(&id).ok_or(StoreError::TrailNotFound(id))?;
            let count = t.by_trail.get(&id).map_or(0, BTreeSet::len);
            if count > 0 {
                return Err(StoreError::TrailHasReviews { trail: id, count });
            }
            let key = trail.name.to_lowercase();
            t.names.remove(&key);
            t.trails.remove(&id);
            t.by_trail.remove(&id);
            Ok(())
        })
    }

    pub fn get_trail(&self, id: TrailId) -> Option<TrailRecord> {
        self.read().trails.get(&id).cloned()
    }

    pub fn get_trail_by_name(&self, name: &str) -> Option<TrailRecord> {
        let tables = self.read();
        let id = tables.names.get(&name.to_lowercase())?;
        tables.trails.get(id).cloned()
    }

    /// All trails in name order.
    pub fn trails(&self) -> Vec<TrailRecord> {
        let mut out: Vec<_> = self.read().trails.values().cloned().collect();
        out.sort_by(|a, b| a.name.cmp(&b.name));
        out
    }

    pub fn trail_count(&self) -> usize {
        self.read().trails.len()
    }

    pub fn insert_review(&self, review: NewReview) -> Result<ReviewId, StoreError> {
        if review.text.is_empty() {
            return Err(StoreError::Validation("review text is empty".into()));
        }
        if normalize_review_text(&review.text, &self.contractions) != review.text {
            return Err(StoreError::Validation("review text is not normalized".into()));
        }
        self.write(|t| {
            if !t.trails.contains_key(&review.trail_id) {
                return Err(StoreError::TrailNotFound(review.trail_id));
            }
            t.last_review += 1;
            let id = ReviewId(t.last_review);
            t.by_trail.entry(review.trail_id).or_default().insert(id);
            t.reviews.insert(
                id,
                Review {
                    id,
                    trail_id: review.trail_id,
                    source: review.source,
                    text: review.text,
                    fetched_at: review.fetched_at,
                },
            );
            Ok(id)
        })
    }

    pub fn delete_review(&self, id: ReviewId) -> Result<(), StoreError> {
        self.write(|t| {
            let review = t.reviews.remove(&id).ok_or(StoreError::ReviewNotFound(id))?;
            if let Some(set) = t.by_trail.get_mut(&review.trail_id) {
                set.remove(&id);
            }
            Ok(())
        })
    }

    /// Reviews of one trail in id order.
    pub fn reviews_for_trail(&self, id: TrailId) -> Result<Vec<Review>, StoreError> {
        self.metrics.review_reads.fetch_add(1, Ordering::Relaxed);
        let tables = self.read();
        if !tables.trails.contains_key(&id) {
            return Err(StoreError::TrailNotFound(id));
        }
        Ok(tables.by_trail.get(&id).into_iter().flatten().filter_map(|rid| tables.reviews.get(rid).cloned()).collect())
    }

    /// Hash of the trail's review-id set; changes whenever a review is added
    /// or removed. Reviews are immutable, so ids identify content.
    pub fn review_fingerprint(&self, id: TrailId) -> Result<u64, StoreError> {
        let tables = self.read();
        if !tables.trails.contains_key(&id) {
            return Err(StoreError::TrailNotFound(id));
        }
        let mut h = DefaultHasher::new();
        let ids = tables.by_trail.get(&id);
        ids.map_or(0, BTreeSet::len).hash(&mut h);
        for rid in ids.into_iter().flatten() {
            rid.hash(&mut h);
        }
        Ok(h.finish())
    }

    pub fn review_count(&self) -> usize {
        self.read().reviews.len()
    }

    /// Trails matching `filter`, ordered by its `ORDER BY` (ties by name,
    /// default name order) and truncated to its `LIMIT`.
    pub fn exec_filter(&self, filter: &FilterExpr) -> Vec<TrailRecord> {
        self.metrics.filter_execs.fetch_add(1, Ordering::Relaxed);
        let tables = self.read();
        let mut rows: Vec<TrailRecord> = tables.trails.values().filter(|t| filter.matches(t)).cloned().collect();
        filter.sort(&mut rows);
        if let Some(limit) = filter.limit {
            rows.truncate(limit);
        }
        rows
    }

    pub fn snapshot(&self) -> Snapshot {
        self.read().snapshot()
    }
}
