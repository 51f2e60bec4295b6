mod common;

use std::time::Duration;

use axum::body::Body;
use axum::http::Request;
use common::*;
use serde_json::{json, Value};
use trailrag_core::fixtures::{REVIEWS_JSONL, TRAILS_JSONL};
use trailrag_core::ingest::{import_corpus, RelevanceConfig};
use trailrag_core::store::{Difficulty, TrailStore};
use trailrag_server::{ConfigLayer, LogSink};

const WINDSOR_BIKING: &str = "what do reviews say about biking on the Windsor Locks Canal trail";

#[tokio::test]
async fn chat_review_question_cites_five_reviews() {
    let (app, _) = app();
    let (status, body) = post_json(&app, "/api/chat", &json!({ "message": WINDSOR_BIKING })).await;
    assert_eq!(status, 200, "{body}");
    assert_eq!(body["route"], "review_rag");
    assert_eq!(body["k_used"], 5);
    let sources = body["sources"].as_array().unwrap();
    assert_eq!(sources.len(), 5);
    assert!(sources.iter().all(|s| s["review_id"].is_u64() && s["snippet"].as_str().is_some_and(|t| !t.is_empty())));
    assert!(!body["session_id"].as_str().unwrap().is_empty());
}

#[tokio::test]
async fn chat_rejects_empty_and_malformed() {
    let (app, _) = app();
    for body in [json!({"message": ""}), json!({"message": "  \n "})] {
        let (status, err) = post_json(&app, "/api/chat", &body).await;
        assert_eq!(status, 400);
        assert_eq!(err["code"], "empty_message");
    }
    let (status, err) = post(&app, "/api/chat", "{not json").await;
    assert_eq!(status, 400);
    assert_eq!(err["code"], "invalid_json");
    let (status, err) = post_json(&app, "/api/chat", &json!({"message": "hi", "k": 0})).await;
    assert_eq!(status, 400);
    assert_eq!(err["code"], "invalid_k");
}

#[tokio::test]
async fn chat_session_is_kept_and_k_override_applies() {
    let (app, state) = app();
    let (_, first) = post_json(&app, "/api/chat", &json!({"message": WINDSOR_BIKING, "k": 3})).await;
    assert_eq!(first["sources"].as_array().unwrap().len(), 3);
    let id = first["session_id"].as_str().unwrap().to_string();
    let (_, second) =
        post_json(&app, "/api/chat", &json!({"session_id": id, "message": "which trails are easy"})).await;
    assert_eq!(second["session_id"], id);
    assert_eq!(state.sessions.len(), 1);
    let (_, mine) = post_json(&app, "/api/chat", &json!({"session_id": "abc", "message": "hello"})).await;
    assert_eq!(mine["session_id"], "abc");
}

#[tokio::test]
async fn chat_ambiguous_trail_returns_clarification() {
    let (app, state) = app();
    let llm_calls = state.engine.llm().call_count();
    let (status, body) =
        post_json(&app, "/api/chat", &json!({"message": "what do reviews say about Windsor Lock Canal"})).await;
    assert_eq!(status, 200, "{body}");
    let candidates = body["clarification"]["candidates"].as_array().expect("clarification payload");
    assert_eq!(candidates[0], "Windsor Locks Canal Trail");
    assert_eq!(state.engine.llm().call_count(), llm_calls);
}

#[tokio::test]
async fn llm_down_without_mock_is_503_naming_backend() {
    let cfg = config(ConfigLayer {
        mock_llm: Some(false),
        llm_endpoint: Some("http://127.0.0.1:9".into()),
        llm_timeout_secs: Some(2),
        ..ConfigLayer::default()
    });
    let (app, _) = app_with(&cfg, LogSink::Off);
    let (status, body) = post_json(&app, "/api/chat", &json!({ "message": WINDSOR_BIKING })).await;
    assert_eq!(status, 503, "{body}");
    assert_eq!(body["code"], "backend_unavailable");
    assert!(body["backend"].as_str().unwrap().contains("127.0.0.1:9"), "{body}");
    // browsing does not need the model
    let (status, _) = get(&app, "/api/trails").await;
    assert_eq!(status, 200);
}

fn names(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|t| t["name"].as_str().unwrap().to_string()).collect()
}

#[tokio::test]
async fn trails_filter_mirrors_store() {
    let (app, state) = app();
    let uri = format!("/api/trails?filter={}", encode(r#"difficulty = "easy""#));
    let (status, body) = get(&app, &uri).await;
    assert_eq!(status, 200);
    let mut expected: Vec<String> = state
        .engine
        .store()
        .trails()
        .into_iter()
        .filter(|t| t.difficulty == Difficulty::Easy)
        .map(|t| t.name)
        .collect();
    expected.sort();
    assert!(!expected.is_empty());
    assert_eq!(names(&body), expected);
}

#[tokio::test]
async fn trails_without_filter_are_all_in_name_order() {
    let (app, _) = app();
    let (_, body) = get(&app, "/api/trails").await;
    let got = names(&body);
    assert_eq!(got.len(), 10);
    let mut sorted = got.clone();
    sorted.sort();
    assert_eq!(got, sorted);
    let (_, two) = get(&app, "/api/trails?limit=2").await;
    assert_eq!(names(&two), got[..2].to_vec());
}

#[tokio::test]
async fn trails_bad_filter_reports_position() {
    let (app, _) = app();
    let uri = format!("/api/trails?filter={}", encode(r#"length_miles <= "far""#));
    let (status, body) = get(&app, &uri).await;
    assert_eq!(status, 400);
    assert_eq!(body["code"], "invalid_filter");
    assert!(body["position"].is_u64());
    let (status, body) = get(&app, &format!("/api/trails?filter={}", encode("difficulty = "))).await;
    assert_eq!(status, 400);
    assert_eq!(body["position"], 13);
    assert!(!body["expected"].as_array().unwrap().is_empty());
    let (status, body) = get(&app, "/api/trails?limit=-1").await;
    assert_eq!((status.as_u16(), body["code"].as_str()), (400, Some("invalid_limit")));
}

#[tokio::test]
async fn reviews_by_trail_and_unknown_trail() {
    let (app, state) = app();
    let trail = state.engine.store().get_trail_by_name("Air Line State Park Trail").unwrap();
    let (status, body) = get(&app, &format!("/api/trails/{}/reviews", trail.id)).await;
    assert_eq!(status, 200);
    let expected = state.engine.store().reviews_for_trail(trail.id).unwrap();
    assert_eq!(body, serde_json::to_value(&expected).unwrap());
    assert_eq!(body.as_array().unwrap().len(), 6);
    for uri in ["/api/trails/unknown/reviews", "/api/trails/4242/reviews"] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, 404);
        assert_eq!(body["code"], "trail_not_found");
    }
}

fn write_fixture(dir: &tempfile::TempDir) -> (std::path::PathBuf, std::path::PathBuf) {
    let trails = dir.path().join("trails.jsonl");
    let reviews = dir.path().join("reviews.jsonl");
    std::fs::write(&trails, TRAILS_JSONL).unwrap();
    std::fs::write(&reviews, REVIEWS_JSONL).unwrap();
    (trails, reviews)
}

#[tokio::test]
async fn ingest_matches_direct_import() {
    let dir = tempfile::tempdir().unwrap();
    let (trails, reviews) = write_fixture(&dir);
    let oracle = import_corpus(&trails, &reviews, &TrailStore::in_memory(), &RelevanceConfig::default()).unwrap();

    let cfg = config(ConfigLayer { load_fixture: Some(false), ..ConfigLayer::default() });
    let (app, state) = app_with(&cfg, LogSink::Off);
    assert_eq!(state.engine.store().trail_count(), 0);
    let req = json!({"trails_path": trails, "reviews_path": reviews});
    let (status, body) = post_json(&app, "/api/admin/ingest", &req).await;
    assert_eq!(status, 200, "{body}");
    assert_eq!(body["trails_loaded"], oracle.trails_loaded);
    assert_eq!(body["reviews_loaded"], oracle.reviews_loaded);
    assert_eq!(body["reviews_filtered"], oracle.reviews_filtered);
    assert_eq!(state.engine.store().review_count(), oracle.reviews_loaded);
}

#[tokio::test]
async fn ingest_invalidates_cached_trails() {
    let dir = tempfile::tempdir().unwrap();
    let (app, state) = app();
    post_json(&app, "/api/chat", &json!({ "message": WINDSOR_BIKING })).await;
    assert_eq!(state.engine.cache().stats().entries, 1);
    let trails = dir.path().join("t.jsonl");
    let reviews = dir.path().join("r.jsonl");
    std::fs::write(&trails, "").unwrap();
    std::fs::write(
        &reviews,
        r#"{"trail_name_hint": "Windsor Locks Canal Trail", "source": "other", "text": "A brand new review about the bridge repairs near the lock keeper house, which reopened this spring."}"#,
    )
    .unwrap();
    let (status, body) =
        post_json(&app, "/api/admin/ingest", &json!({"trails_path": trails, "reviews_path": reviews})).await;
    assert_eq!(status, 200, "{body}");
    assert_eq!(body["reviews_loaded"], 1);
    assert_eq!(state.engine.cache().stats().entries, 0);
}

#[tokio::test]
async fn ingest_failures_and_admin_gate() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"name\": \"x\"\n").unwrap();
    let (status, body) = post_json(&app, "/api/admin/ingest", &json!({"trails_path": bad, "reviews_path": bad})).await;
    assert_eq!(status, 422);
    assert_eq!(body["code"], "ingest_failed");
    assert!(body["message"].as_str().unwrap().contains("line 1"), "{body}");
    let missing = json!({"trails_path": dir.path().join("nope"), "reviews_path": bad});
    assert_eq!(post_json(&app, "/api/admin/ingest", &missing).await.0, 422);

    let cfg = config(ConfigLayer { admin_enabled: Some(false), ..ConfigLayer::default() });
    let (closed, _) = app_with(&cfg, LogSink::Off);
    let (status, body) = post_json(&closed, "/api/admin/ingest", &json!({})).await;
    assert_eq!(status, 403);
    assert_eq!(body["code"], "admin_disabled");
}

#[tokio::test]
async fn stats_count_cache_hits() {
    let (app, _) = app();
    let (_, before) = get(&app, "/api/stats").await;
    assert_eq!(before["cache"]["hits"], 0);
    for _ in 0..2 {
        post_json(&app, "/api/chat", &json!({ "message": WINDSOR_BIKING })).await;
    }
    let (_, after) = get(&app, "/api/stats").await;
    assert!(after["cache"]["hits"].as_u64().unwrap() >= 1, "{after}");
    assert_eq!(after["cache"]["misses"], 1);
    assert_eq!(after["routes"]["review_rag"], 2);
    assert_eq!(after["llm"]["calls"], 2);
}

#[tokio::test]
async fn gets_have_no_side_effects() {
    let (app, state) = app();
    let (_, stats_before) = get(&app, "/api/stats").await;
    let (_, a) = get(&app, "/api/trails?filter=pets_allowed%20%3D%20%22yes%22").await;
    let (_, b) = get(&app, "/api/trails?filter=pets_allowed%20%3D%20%22yes%22").await;
    let (_, r1) = get(&app, "/api/trails/1/reviews").await;
    let (_, r2) = get(&app, "/api/trails/1/reviews").await;
    let (_, stats_after) = get(&app, "/api/stats").await;
    assert_eq!(a, b);
    assert_eq!(r1, r2);
    assert_eq!(stats_before, stats_after);
    assert_eq!(state.engine.embedder().call_count(), 0);
}

#[tokio::test]
async fn unknown_paths_and_methods_get_json_errors() {
    let (app, _) = app();
    let (status, body) = get(&app, "/api/nothing").await;
    assert_eq!((status.as_u16(), body["code"].as_str()), (404, Some("not_found")));
    let (status, body) = get(&app, "/api/chat").await;
    assert_eq!((status.as_u16(), body["code"].as_str()), (405, Some("method_not_allowed")));
}

#[tokio::test]
async fn cors_allows_configured_origin_only() {
    let (app, _) = app();
    let preflight = |origin: &str| {
        Request::builder()
            .method("OPTIONS")
            .uri("/api/chat")
            .header("origin", origin)
            .header("access-control-request-method", "POST")
            .body(Body::empty())
            .unwrap()
    };
    use tower::ServiceExt;
    let ok = app.clone().oneshot(preflight("http://localhost:5173")).await.unwrap();
    assert_eq!(ok.headers()["access-control-allow-origin"], "http://localhost:5173");
    let other = app.clone().oneshot(preflight("http://evil.example")).await.unwrap();
    assert!(other.headers().get("access-control-allow-origin").is_none());
}

#[tokio::test]
async fn request_log_is_one_json_line_per_request() {
    let (sink, lines) = LogSink::memory();
    let (app, _) = app_with(&config(ConfigLayer::default()), sink);
    post_json(&app, "/api/chat", &json!({ "message": WINDSOR_BIKING })).await;
    get(&app, "/api/trails/999/reviews").await;
    let lines = lines.lock().unwrap().clone();
    assert_eq!(lines.len(), 2);
    let chat: Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(chat["path"], "/api/chat");
    assert_eq!(chat["status"], 200);
    assert_eq!(chat["route"], "review_rag");
    assert!(chat["timings"]["total_ms"].is_f64());
    let miss: Value = serde_json::from_str(&lines[1]).unwrap();
    assert_eq!(miss["status"], 404);
    assert!(miss.get("route").is_none());
}

#[tokio::test]
async fn file_store_persists_between_starts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.json");
    let cfg = config(ConfigLayer { store_path: Some(path.clone()), ..ConfigLayer::default() });
    let (app, _) = app_with(&cfg, LogSink::Off);
    let (_, first) = get(&app, "/api/trails").await;
    assert!(path.exists());
    let reopened = config(ConfigLayer { store_path: Some(path), load_fixture: Some(false), ..ConfigLayer::default() });
    let (app, _) = app_with(&reopened, LogSink::Off);
    let (_, second) = get(&app, "/api/trails").await;
    assert_eq!(first, second);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn shutdown_drains_in_flight_requests() {
    // Large per-character delay so the chat request is still running when
    // shutdown starts.
    let cfg = config(ConfigLayer { mock_delay_us: Some(300), ..ConfigLayer::default() });
    let (app, _) = app_with(&cfg, LogSink::Off);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(trailrag_server::serve(
        listener,
        app,
        async move {
            let _ = stop_rx.await;
        },
        Duration::from_secs(10),
    ));
    let client = tokio::task::spawn_blocking(move || {
        let body = json!({ "message": WINDSOR_BIKING }).to_string();
        raw_post(addr, "/api/chat", &body)
    });
    tokio::time::sleep(Duration::from_millis(50)).await;
    stop_tx.send(()).unwrap();
    let response = client.await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(server.await.unwrap().unwrap(), "drained within the grace period");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn shutdown_gives_up_after_grace() {
    let cfg = config(ConfigLayer { mock_delay_us: Some(2000), ..ConfigLayer::default() });
    let (app, _) = app_with(&cfg, LogSink::Off);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let server = tokio::spawn(trailrag_server::serve(
        listener,
        app,
        tokio::time::sleep(Duration::from_millis(50)),
        Duration::from_millis(10),
    ));
    let _client = tokio::task::spawn_blocking(move || {
        raw_post(addr, "/api/chat", &json!({ "message": WINDSOR_BIKING }).to_string())
    });
    assert!(!server.await.unwrap().unwrap());
}

fn raw_post(addr: std::net::SocketAddr, path: &str, body: &str) -> String {
    use std::io::{Read, Write};
    let mut s = std::net::TcpStream::connect(addr).unwrap();
    write!(
        s,
        "POST {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut out = String::new();
    let _ = s.read_to_string(&mut out);
    out
}
