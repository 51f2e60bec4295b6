//! Random requests across every endpoint, checked against the published
//! schemas.

use std::collections::HashMap;
use std::path::PathBuf;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use super::filters;
use super::{send, validator};

const MESSAGES: &[&str] = &[
    "what do reviews say about biking on the Windsor Locks Canal trail",
    "which trails are easy",
    "recommend a dog friendly trail near Hebron",
    "how long is the Windsor Locks Canal Trail",
    "what do reviews say about Windsor Lock Canal",
    "are there bathrooms on the Air Line State Park Trail",
    "what is the capital of France",
    "trails longer than 5 miles that allow horses",
    "hi",
    "😀😀😀",
    "'; DROP TABLE trails; --",
];

fn junk<R: Rng>(rng: &mut R) -> String {
    let pool = ['a', 'Z', ' ', '"', '\\', '{', '}', '\n', 'é', '😀', '\u{0}', '<', '='];
    (0..rng.gen_range(0..40)).map(|_| *pool.choose(rng).unwrap()).collect()
}

/// Where a response body is validated.
#[derive(Clone, Copy, Debug)]
enum Kind {
    Chat,
    Trails,
    Reviews,
    Ingest,
    Stats,
    Other,
}

impl Kind {
    fn success_schema(self) -> Option<&'static str> {
        match self {
            Kind::Chat => Some("chat_response.schema.json"),
            Kind::Trails => Some("trail_list.schema.json"),
            Kind::Reviews => Some("review_list.schema.json"),
            Kind::Ingest => Some("ingest_report.schema.json"),
            Kind::Stats => Some("stats.schema.json"),
            Kind::Other => None,
        }
    }
}

fn chat_body<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.08) {
        return junk(rng);
    }
    let mut body = serde_json::Map::new();
    let message = if rng.gen_bool(0.85) { MESSAGES.choose(rng).unwrap().to_string() } else { junk(rng) };
    if rng.gen_bool(0.95) {
        body.insert("message".into(), json!(message));
    }
    if rng.gen_bool(0.3) {
        let id = match rng.gen_range(0..4) {
            0 => "session-a".to_string(),
            1 => "x".repeat(200),
            2 => String::new(),
            _ => format!("s{}", rng.gen_range(0..5)),
        };
        body.insert("session_id".into(), json!(id));
    }
    if rng.gen_bool(0.3) {
        let k: Value = match rng.gen_range(0..5) {
            0 => json!(0),
            1 => json!(-3),
            2 => json!("five"),
            _ => json!(rng.gen_range(1..12)),
        };
        body.insert("k".into(), k);
    }
    if rng.gen_bool(0.2) {
        body.insert("rag".into(), json!(rng.gen_bool(0.5)));
    }
    Value::Object(body).to_string()
}

fn trails_uri<R: Rng>(rng: &mut R) -> String {
    let mut params = Vec::new();
    if rng.gen_bool(0.7) {
        let text = if rng.gen_bool(0.75) {
            let q = filters::random_query(rng);
            filters::render(rng, &q)
        } else {
            junk(rng)
        };
        params.push(format!("filter={}", super::encode(&text)));
    }
    if rng.gen_bool(0.3) {
        let limit = match rng.gen_range(0..4) {
            0 => "-1".to_string(),
            1 => "lots".to_string(),
            _ => rng.gen_range(0..20).to_string(),
        };
        params.push(format!("limit={}", super::encode(&limit)));
    }
    if rng.gen_bool(0.05) {
        params.push("filter=%FF%FE".into());
    }
    if params.is_empty() {
        "/api/trails".into()
    } else {
        format!("/api/trails?{}", params.join("&"))
    }
}

fn random_request<R: Rng>(rng: &mut R, fixture: &(PathBuf, PathBuf)) -> (Kind, Request<Body>) {
    let json_post = |uri: &str, body: String| {
        Request::post(uri).header("content-type", "application/json").body(Body::from(body)).unwrap()
    };
    match rng.gen_range(0..20) {
        0..=6 => (Kind::Chat, json_post("/api/chat", chat_body(rng))),
        7..=10 => (Kind::Trails, Request::get(trails_uri(rng)).body(Body::empty()).unwrap()),
        11..=13 => {
            let id = match rng.gen_range(0..4) {
                0 => "abc".to_string(),
                1 => "99999999999999999999999".to_string(),
                _ => rng.gen_range(0..14).to_string(),
            };
            (Kind::Reviews, Request::get(format!("/api/trails/{id}/reviews")).body(Body::empty()).unwrap())
        }
        14 => {
            let body = match rng.gen_range(0..4) {
                0 => json!({"trails_path": fixture.0, "reviews_path": fixture.1}).to_string(),
                1 => json!({"trails_path": "/nonexistent/trails.jsonl", "reviews_path": fixture.1}).to_string(),
                2 => json!({"trails_path": 7}).to_string(),
                _ => junk(rng),
            };
            (Kind::Ingest, json_post("/api/admin/ingest", body))
        }
        15..=16 => (Kind::Stats, Request::get("/api/stats").body(Body::empty()).unwrap()),
        17 => {
            let uri = *["/", "/api", "/api/trail", "/api/trails/1", "/api/chat/x", "/nope"].choose(rng).unwrap();
            (Kind::Other, Request::get(uri).body(Body::empty()).unwrap())
        }
        _ => {
            let (method, uri) = *[
                ("GET", "/api/chat"),
                ("POST", "/api/trails"),
                ("DELETE", "/api/stats"),
                ("PUT", "/api/admin/ingest"),
            ]
            .choose(rng)
            .unwrap();
            (Kind::Other, Request::builder().method(method).uri(uri).body(Body::empty()).unwrap())
        }
    }
}

#[derive(Debug, Default)]
pub struct TrafficReport {
    pub requests: usize,
    pub statuses: HashMap<u16, usize>,
    pub failures: Vec<String>,
}

/// Send `n` random requests to `app` and validate every response body.
/// Any 5xx other than 503 counts as a failure.
pub async fn run<R: Rng>(rng: &mut R, app: &Router, n: usize, fixture: &(PathBuf, PathBuf)) -> TrafficReport {
    let validators: HashMap<&str, jsonschema::Validator> = [
        "chat_response.schema.json",
        "trail_list.schema.json",
        "review_list.schema.json",
        "ingest_report.schema.json",
        "stats.schema.json",
        "error.schema.json",
    ]
    .into_iter()
    .map(|name| (name, validator(name)))
    .collect();
    let mut report = TrafficReport::default();
    for _ in 0..n {
        let (kind, req) = random_request(rng, fixture);
        let label = format!("{} {}", req.method(), req.uri());
        let (status, body) = send(app, req).await;
        report.requests += 1;
        *report.statuses.entry(status.as_u16()).or_default() += 1;
        if status.is_server_error() && status.as_u16() != 503 {
            report.failures.push(format!("{label}: status {status}: {body}"));
            continue;
        }
        let schema = if status.is_success() { kind.success_schema() } else { Some("error.schema.json") };
        let Some(schema) = schema else {
            report.failures.push(format!("{label}: unexpected success {status}"));
            continue;
        };
        let errors: Vec<String> =
            validators[schema].iter_errors(&body).map(|e| format!("{e} at {}", e.instance_path())).collect();
        if !errors.is_empty() {
            report.failures.push(format!("{label}: {status} body fails {schema}: {errors:?}"));
        }
    }
    report
}
