mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trailrag_core::fixtures::{REVIEWS_JSONL, TRAILS_JSONL};
use trailrag_server::{ConfigLayer, LogSink};

fn fixture_files(dir: &tempfile::TempDir) -> (std::path::PathBuf, std::path::PathBuf) {
    let paths = (dir.path().join("trails.jsonl"), dir.path().join("reviews.jsonl"));
    std::fs::write(&paths.0, TRAILS_JSONL).unwrap();
    std::fs::write(&paths.1, REVIEWS_JSONL).unwrap();
    paths
}

#[tokio::test]
async fn random_traffic_matches_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let paths = fixture_files(&dir);
    let (app, _) = app();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let report = traffic::run(&mut rng, &app, 250, &paths).await;
    assert!(report.failures.is_empty(), "{:#?}", report.failures);
    assert!(report.statuses.contains_key(&200) && report.statuses.contains_key(&400));
}

#[tokio::test]
async fn random_traffic_with_dead_model_only_adds_503() {
    let dir = tempfile::tempdir().unwrap();
    let paths = fixture_files(&dir);
    let cfg = config(ConfigLayer {
        mock_llm: Some(false),
        llm_endpoint: Some("http://127.0.0.1:9".into()),
        llm_timeout_secs: Some(1),
        admin_enabled: Some(false),
        ..ConfigLayer::default()
    });
    let (app, _) = app_with(&cfg, LogSink::Off);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let report = traffic::run(&mut rng, &app, 120, &paths).await;
    assert!(report.failures.is_empty(), "{:#?}", report.failures);
    assert!(report.statuses.contains_key(&503), "{:?}", report.statuses);
    assert!(report.statuses.contains_key(&403), "{:?}", report.statuses);
}
