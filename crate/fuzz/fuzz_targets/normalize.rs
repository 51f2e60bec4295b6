#![no_main]

use libfuzzer_sys::fuzz_target;
use trailrag_core::ingest::{is_forbidden, normalize_review_text, ContractionTable};

fuzz_target!(|text: &str| {
    let table = ContractionTable::bundled();
    let once = normalize_review_text(text, table);
    assert!(!once.chars().any(is_forbidden));
    assert_eq!(table.find_contraction(&once), None);
    assert_eq!(normalize_review_text(&once, table), once);
});
