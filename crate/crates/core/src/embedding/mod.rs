//! Text embeddings.
//!
//! Every backend returns unit-norm vectors, so cosine similarity is a dot
//! product. `call_count` counts texts sent to the backend, which lets tests
//! observe cache hits.

mod reference;
mod remote;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use reference::ReferenceEmbedder;
pub use remote::{decode_embed_response, EmbedRequest, EmbedResponse, RemoteEmbedder, RemoteEmbedderConfig};

/// Largest deviation from unit norm tolerated on vectors we build.
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("text at index {index} is empty")]
    EmptyText { index: usize },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("vector contains a non-finite value")]
    NonFinite,
    #[error("embedding backend timed out: {0}")]
    Timeout(String),
    #[error("embedding backend unavailable: {0}")]
    Unavailable(String),
    #[error("embedding backend protocol error: {0}")]
    Protocol(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("batch element {index}: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<EmbedError>,
    },
}

impl EmbedError {
    /// Whether the failure is the backend being down or slow, as opposed to
    /// bad input.
    pub fn is_backend_failure(&self) -> bool {
        match self {
            EmbedError::Timeout(_) | EmbedError::Unavailable(_) | EmbedError::Protocol(_) => true,
            EmbedError::Batch { source, .. } => source.is_backend_failure(),
            _ => false,
        }
    }
}

/// A unit-norm embedding.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// Scale `raw` to unit length.
    pub fn normalize(raw: Vec<f64>) -> Result<Self, EmbedError> {
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(EmbedError::ZeroVector);
        }
        if !norm.is_finite() {
            // Overflowed while squaring; rescale by the max first.
            let max = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Self::normalize(raw.into_iter().map(|v| v / max).collect());
        }
        Ok(Self(raw.into_iter().map(|v| v / norm).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dot product, i.e. cosine similarity for unit vectors. Panics on a
    /// dimension mismatch; callers check dims first.
    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "embedding dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

/// Free-function form of [`EmbeddingVector::normalize`].
pub fn normalize(raw: Vec<f64>) -> Result<EmbeddingVector, EmbedError> {
    EmbeddingVector::normalize(raw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    RemoteHttp,
    ReferenceHash,
}

/// What produced a vector. Vectors from different identities are never
/// compared.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BackendIdentity {
    pub kind: BackendKind,
    pub model: String,
    pub dim: usize,
}

impl fmt::Display for BackendIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            BackendKind::RemoteHttp => "remote_http",
            BackendKind::ReferenceHash => "reference_hash",
        };
        write!(f, "{kind}:{}/{}", self.model, self.dim)
    }
}

pub trait Embedder: Send + Sync {
    fn identity(&self) -> BackendIdentity;

    fn dim(&self) -> usize {
        self.identity().dim
    }

    /// Texts embedded so far; monotone.
    fn call_count(&self) -> u64;

    /// One backend invocation. Texts are already validated as non-empty.
    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

pub fn embed(backend: &dyn Embedder, text: &str) -> Result<EmbeddingVector, EmbedError> {
    if text.is_empty() {
        return Err(EmbedError::EmptyText { index: 0 });
    }
    let mut out = backend.embed_texts(&[text])?;
    out.pop().ok_or_else(|| EmbedError::Protocol("backend returned no vector".into()))
}

/// Embed several texts in one backend call, preserving order.
pub fn embed_batch<S: AsRef<str>>(backend: &dyn Embedder, texts: &[S]) -> Result<Vec<EmbeddingVector>, EmbedError> {
    if let Some(index) = texts.iter().position(|t| t.as_ref().is_empty()) {
        return Err(EmbedError::EmptyText { index });
    }
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let refs: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
    let out = backend.embed_texts(&refs)?;
    if out.len() != texts.len() {
        return Err(EmbedError::Protocol(format!("backend returned {} vectors for {} texts", out.len(), texts.len())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        let v = normalize(vec![3.0, 4.0]).unwrap();
        assert!((v.values()[0] - 0.6).abs() < 1e-12);
        assert!((v.values()[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn unit_vector_is_fixed() {
        let v = normalize(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(v.values(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_and_non_finite_are_errors() {
        assert_eq!(normalize(vec![0.0; 8]), Err(EmbedError::ZeroVector));
        assert_eq!(normalize(vec![1.0, f64::NAN]), Err(EmbedError::NonFinite));
        assert_eq!(normalize(vec![f64::INFINITY]), Err(EmbedError::NonFinite));
    }

    #[test]
    fn huge_components_still_normalize() {
        let v = normalize(vec![1e300, 1e300]).unwrap();
        assert!((v.norm() - 1.0).abs() < NORM_TOLERANCE);
    }

    #[test]
    fn batch_reports_empty_index() {
        let e = ReferenceEmbedder::default();
        assert_eq!(embed_batch(&e, &["a", "b", ""]), Err(EmbedError::EmptyText { index: 2 }));
        assert_eq!(e.call_count(), 0);
        assert_eq!(embed(&e, ""), Err(EmbedError::EmptyText { index: 0 }));
    }
}
