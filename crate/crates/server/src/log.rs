//! One JSON line per request.

use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::extract::{Request, State};
use axum::middleware::Next;
use axum::response::Response;
use serde::Serialize;
use trailrag_core::orchestrator::Timings;
use trailrag_core::RouteKind;

use crate::api::AppState;

/// Where request logs go.
#[derive(Clone, Debug, Default)]
pub enum LogSink {
    #[default]
    Stderr,
    /// Kept in memory, for tests.
    Memory(Arc<Mutex<Vec<String>>>),
    Off,
}

impl LogSink {
    pub fn memory() -> (Self, Arc<Mutex<Vec<String>>>) {
        let lines = Arc::new(Mutex::new(Vec::new()));
        (LogSink::Memory(Arc::clone(&lines)), lines)
    }

    pub fn write(&self, line: &str) {
        match self {
            LogSink::Stderr => {
                let _ = writeln!(std::io::stderr().lock(), "{line}");
            }
            LogSink::Memory(lines) => lines.lock().unwrap_or_else(|e| e.into_inner()).push(line.to_string()),
            LogSink::Off => {}
        }
    }
}

/// Set by handlers as a response extension; picked up by [`request_log`].
#[derive(Clone, Copy, Debug)]
pub struct RouteInfo {
    pub route: RouteKind,
    pub timings: Timings,
}

#[derive(Serialize)]
struct LogLine<'a> {
    ts: String,
    method: &'a str,
    path: &'a str,
    status: u16,
    latency_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    route: Option<RouteKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
}

pub async fn request_log(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let start = Instant::now();
    let method = req.method().to_string();
    let path = req.uri().path().to_string();
    let resp = next.run(req).await;
    let info = resp.extensions().get::<RouteInfo>().copied();
    let line = LogLine {
        ts: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        method: &method,
        path: &path,
        status: resp.status().as_u16(),
        latency_ms: start.elapsed().as_secs_f64() * 1000.0,
        route: info.map(|i| i.route),
        timings: info.map(|i| i.timings),
    };
    if let Ok(text) = serde_json::to_string(&line) {
        state.log.write(&text);
    }
    resp
}
