use proptest::prelude::*;
use trailrag_core::fixtures::{bundled_store, REVIEWS_JSONL, TRAILS_JSONL};
use trailrag_core::ingest::{import_corpus, is_forbidden, normalize_review_text, ContractionTable, RelevanceConfig};
use trailrag_core::store::TrailStore;

fn texts(store: &TrailStore) -> Vec<(String, Vec<String>)> {
    store
        .trails()
        .into_iter()
        .map(|t| {
            let reviews = store.reviews_for_trail(t.id).unwrap().into_iter().map(|r| r.text).collect();
            (t.name, reviews)
        })
        .collect()
}

#[test]
fn importing_files_matches_the_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let trails = dir.path().join("trails.jsonl");
    let reviews = dir.path().join("reviews.jsonl");
    std::fs::write(&trails, TRAILS_JSONL).unwrap();
    std::fs::write(&reviews, REVIEWS_JSONL).unwrap();
    let store = TrailStore::in_memory();
    let report = import_corpus(&trails, &reviews, &store, &RelevanceConfig::default()).unwrap();
    let (bundled, bundled_report) = bundled_store();
    assert_eq!(report, bundled_report);
    assert_eq!(texts(&store), texts(&bundled));
    assert_eq!(report.trails_loaded, 10);
    assert_eq!(
        report.reviews_loaded + report.reviews_filtered,
        REVIEWS_JSONL.lines().filter(|l| !l.trim().is_empty()).count()
    );
}

#[test]
fn failed_import_leaves_store_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let trails = dir.path().join("trails.jsonl");
    let reviews = dir.path().join("reviews.jsonl");
    std::fs::write(&trails, TRAILS_JSONL).unwrap();
    std::fs::write(&reviews, format!("{REVIEWS_JSONL}{{\"trail_name\": 3}}\n")).unwrap();
    let store = TrailStore::in_memory();
    assert!(import_corpus(&trails, &reviews, &store, &RelevanceConfig::default()).is_err());
    assert_eq!(store.trail_count(), 0);
    assert_eq!(store.review_count(), 0);
}

#[test]
fn reimport_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let trails = dir.path().join("trails.jsonl");
    let reviews = dir.path().join("reviews.jsonl");
    std::fs::write(&trails, TRAILS_JSONL).unwrap();
    std::fs::write(&reviews, REVIEWS_JSONL).unwrap();
    let (store, _) = bundled_store();
    let before = texts(&store);
    import_corpus(&trails, &reviews, &store, &RelevanceConfig::default()).unwrap();
    assert_eq!(texts(&store), before);
}

/// A contraction at a word boundary anywhere in `text`, found by plain
/// substring search.
fn leftover_contraction(text: &str, table: &ContractionTable) -> Option<String> {
    let lower = text.to_ascii_lowercase();
    for c in table.entries() {
        let needle = c.contraction.to_ascii_lowercase();
        for (at, _) in lower.match_indices(&needle) {
            let before = lower[..at].chars().next_back();
            let after = lower[at + needle.len()..].chars().next();
            if !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric) {
                return Some(c.contraction.clone());
            }
        }
    }
    None
}

fn with_contractions() -> impl Strategy<Value = String> {
    let words: Vec<String> = ContractionTable::bundled().entries().iter().map(|c| c.contraction.clone()).collect();
    proptest::collection::vec(
        prop_oneof![proptest::sample::select(words), "[a-zA-Z'’]{1,6}", Just("’".to_string())],
        0..12,
    )
    .prop_map(|ws| ws.join(" "))
}

proptest! {
    #[test]
    fn normalization_is_idempotent(raw in "\\PC{0,80}|[a-zA-Z'’* \\n\\t\u{1F600}\u{200D}\u{FE0F}]{0,80}") {
        let table = ContractionTable::bundled();
        let once = normalize_review_text(&raw, table);
        prop_assert_eq!(normalize_review_text(&once, table), once.clone());
        prop_assert!(!once.chars().any(is_forbidden));
        prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
    }

    #[test]
    fn no_contraction_survives(raw in with_contractions()) {
        let table = ContractionTable::bundled();
        let out = normalize_review_text(&raw, table);
        prop_assert_eq!(leftover_contraction(&out, table), None, "{:?} -> {:?}", raw, out);
    }
}
