#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::fixtures::TRAILS_JSONL;
use trailrag_core::ingest::{import_from_readers, ContractionTable, CorpusSource, RelevanceConfig};
use trailrag_core::store::TrailStore;

fuzz_target!(|data: &[u8]| {
    let store = TrailStore::in_memory();
    let src =
        CorpusSource { trails: TRAILS_JSONL.as_bytes(), trails_name: "trails", reviews: data, reviews_name: "reviews" };
    match import_from_readers(src, &store, ContractionTable::bundled(), &RelevanceConfig::default()) {
        Ok(report) => assert_eq!(store.review_count(), report.reviews_loaded),
        Err(_) => assert_eq!(store.trail_count(), 0),
    }
});
