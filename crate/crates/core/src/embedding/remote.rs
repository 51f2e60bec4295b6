use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendIdentity, BackendKind, EmbedError, Embedder, EmbeddingVector};
use crate::sync::Semaphore;

/// Body of `POST {endpoint}/embed`.
#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedRequest<'a> {
    pub model: &'a str,
    #[serde(borrow)]
    pub texts: Vec<&'a str>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct RemoteEmbedderConfig {
    /// Base URL; requests go to `{endpoint}/embed`.
    pub endpoint: String,
    pub model: String,
    /// Expected dimension. `None` accepts whatever the first response reports
    /// and holds every later response to it.
    pub dim: Option<usize>,
    pub timeout: Duration,
    pub retries: u32,
    pub max_in_flight: usize,
}

impl RemoteEmbedderConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            dim: None,
            timeout: Duration::from_secs(5),
            retries: 1,
            max_in_flight: 8,
        }
    }
}

/// Validate and normalize a `/embed` response body.
pub fn decode_embed_response(
    body: &[u8],
    expected_count: usize,
    expected_dim: Option<usize>,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let resp: EmbedResponse =
        serde_json::from_slice(body).map_err(|e| EmbedError::Protocol(format!("bad response body: {e}")))?;
    if resp.dim == 0 {
        return Err(EmbedError::Protocol("dim must be positive".into()));
    }
    if let Some(expected) = expected_dim {
        if resp.dim != expected {
            return Err(EmbedError::DimMismatch { expected, got: resp.dim });
        }
    }
    if resp.vectors.len() != expected_count {
        return Err(EmbedError::Protocol(format!("expected {expected_count} vectors, got {}", resp.vectors.len())));
    }
    resp.vectors
        .into_iter()
        .enumerate()
        .map(|(index, v)| {
            if v.len() != resp.dim {
                return Err(EmbedError::Batch {
                    index,
                    source: Box::new(EmbedError::DimMismatch { expected: resp.dim, got: v.len() }),
                });
            }
            EmbeddingVector::normalize(v).map_err(|e| EmbedError::Batch { index, source: Box::new(e) })
        })
        .collect()
}

/// Client for an HTTP embedding service.
pub struct RemoteEmbedder {
    config: RemoteEmbedderConfig,
    agent: ureq::Agent,
    learned_dim: AtomicUsize,
    calls: AtomicU64,
    in_flight: Semaphore,
}

impl RemoteEmbedder {
    pub fn new(config: RemoteEmbedderConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            learned_dim: AtomicUsize::new(config.dim.unwrap_or(0)),
            in_flight: Semaphore::new(config.max_in_flight),
            agent,
            config,
            calls: AtomicU64::new(0),
        }
    }

    fn url(&self) -> String {
        format!("{}/embed", self.config.endpoint.trim_end_matches('/'))
    }

    fn expected_dim(&self) -> Option<usize> {
        match self.learned_dim.load(Ordering::Relaxed) {
            0 => None,
            d => Some(d),
        }
    }

    fn attempt(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let body = EmbedRequest { model: &self.config.model, texts: texts.to_vec() };
        let mut resp = self.agent.post(&self.url()).send_json(&body).map_err(classify)?;
        let status = resp.status();
        let bytes = resp.body_mut().read_to_vec().map_err(classify)?;
        if status.is_server_error() {
            return Err(EmbedError::Unavailable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(EmbedError::Protocol(format!("HTTP {status}")));
        }
        let vectors = decode_embed_response(&bytes, texts.len(), self.expected_dim())?;
        if let Some(first) = vectors.first() {
            let _ = self.learned_dim.compare_exchange(0, first.dim(), Ordering::Relaxed, Ordering::Relaxed);
        }
        Ok(vectors)
    }
}

fn classify(e: ureq::Error) -> EmbedError {
    match e {
        ureq::Error::Timeout(t) => EmbedError::Timeout(t.to_string()),
        other => EmbedError::Unavailable(other.to_string()),
    }
}

impl Embedder for RemoteEmbedder {
    fn identity(&self) -> BackendIdentity {
        BackendIdentity {
            kind: BackendKind::RemoteHttp,
            model: format!("{}@{}", self.config.model, self.config.endpoint),
            dim: self.expected_dim().unwrap_or(0),
        }
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let _permit = self.in_flight.acquire();
        self.calls.fetch_add(texts.len() as u64, Ordering::Relaxed);
        let mut last = None;
        for _ in 0..=self.config.retries {
            match self.attempt(texts) {
                Ok(v) => return Ok(v),
                Err(e @ (EmbedError::Timeout(_) | EmbedError::Unavailable(_))) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}
