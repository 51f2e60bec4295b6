#![allow(dead_code)]

use std::sync::Arc;

pub mod filters;
pub mod traffic;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use trailrag_server::{build_state, router, schemas, AppState, ConfigLayer, LogSink, ServerConfig};

pub fn config(layer: ConfigLayer) -> ServerConfig {
    let base = ConfigLayer { mock_delay_us: Some(0), admin_enabled: Some(true), ..ConfigLayer::default() };
    ServerConfig::layered([base, layer]).expect("valid test config")
}

pub fn app_with(cfg: &ServerConfig, log: LogSink) -> (Router, Arc<AppState>) {
    let state = Arc::new(build_state(cfg, log).expect("state builds"));
    (router(Arc::clone(&state), &cfg.cors_origins), state)
}

pub fn app() -> (Router, Arc<AppState>) {
    app_with(&config(ConfigLayer::default()), LogSink::Off)
}

pub async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.expect("infallible service");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|e| panic!("non-JSON body ({e}) with status {status}: {:?}", String::from_utf8_lossy(&bytes)));
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn post(app: &Router, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let req = Request::post(uri).header("content-type", "application/json").body(body.into()).unwrap();
    send(app, req).await
}

pub async fn post_json(app: &Router, uri: &str, body: &Value) -> (StatusCode, Value) {
    post(app, uri, body.to_string()).await
}

/// Percent-encode a query value.
pub fn encode(s: &str) -> String {
    let mut out = String::new();
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-_.~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

/// Serves the published schemas by URI so relative `$ref`s resolve offline.
struct Published;

impl jsonschema::Retrieve for Published {
    fn retrieve(&self, uri: &jsonschema::Uri<String>) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let name = uri.as_str().strip_prefix(schemas::BASE_URI).ok_or("unknown schema host")?;
        let (_, text) = schemas::ALL.iter().find(|(n, _)| *n == name).ok_or("unknown schema")?;
        Ok(serde_json::from_str(text)?)
    }
}

/// Validator for one published schema.
pub fn validator(name: &str) -> jsonschema::Validator {
    let (_, text) = schemas::ALL.iter().find(|(n, _)| *n == name).unwrap_or_else(|| panic!("no schema {name}"));
    let schema: Value = serde_json::from_str(text).unwrap();
    jsonschema::options()
        .with_retriever(Published)
        .build(&schema)
        .unwrap_or_else(|e| panic!("{name} does not compile: {e}"))
}

pub fn assert_valid(v: &jsonschema::Validator, name: &str, instance: &Value) {
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\ninstance: {instance}");
}
