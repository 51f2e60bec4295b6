//! Chat-model backends and prompt construction.

mod prompt;
mod remote;
mod scripted;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sync::Semaphore;

pub use prompt::{
    build_all_reviews_prompt, build_rag_prompt, build_recommendation_prompt, build_structured_prompt, render_review,
    render_trail_row, PromptBundle, Provenance, Role, Turn, DEFAULT_PROMPT_LIMIT, NO_REVIEWS, NO_TRAILS,
};
pub use remote::{decode_chat_response, ChatMessage, ChatRequest, ChatResponseBody, RemoteChatConfig, RemoteChatModel};
pub use scripted::{parse_script, parse_script_file, ScriptEntry, ScriptedModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("chat backend timed out: {0}")]
    Timeout(String),
    #[error("chat backend unavailable: {0}")]
    Unavailable(String),
    #[error("chat backend protocol error: {0}")]
    Protocol(String),
    #[error("chat backend returned an empty response")]
    EmptyOutput,
    #[error("prompt of {size} characters exceeds the limit of {limit}")]
    PromptTooLarge { size: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmKind {
    RemoteHttp,
    ScriptedMock,
}

pub trait LanguageModel: Send + Sync {
    fn kind(&self) -> LlmKind;

    /// Human-readable backend name, used in error responses.
    fn name(&self) -> String;

    fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError>;
}

/// Shared entry point to a chat backend: enforces the prompt limit, bounds
/// concurrent calls and rejects empty output.
pub struct LlmGateway {
    backend: Box<dyn LanguageModel>,
    prompt_limit: usize,
    in_flight: Semaphore,
    calls: AtomicU64,
}

impl LlmGateway {
    pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

    pub fn new(backend: Box<dyn LanguageModel>) -> Self {
        Self::with_limits(backend, DEFAULT_PROMPT_LIMIT, Self::DEFAULT_MAX_IN_FLIGHT)
    }

    pub fn with_limits(backend: Box<dyn LanguageModel>, prompt_limit: usize, max_in_flight: usize) -> Self {
        Self { backend, prompt_limit, in_flight: Semaphore::new(max_in_flight), calls: AtomicU64::new(0) }
    }

    pub fn prompt_limit(&self) -> usize {
        self.prompt_limit
    }

    pub fn kind(&self) -> LlmKind {
        self.backend.kind()
    }

    pub fn name(&self) -> String {
        self.backend.name()
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError> {
        let size = bundle.size();
        if size > self.prompt_limit {
            return Err(LlmError::PromptTooLarge { size, limit: self.prompt_limit });
        }
        let _permit = self.in_flight.acquire();
        self.calls.fetch_add(1, Ordering::Relaxed);
        let out = self.backend.complete(bundle)?;
        if out.trim().is_empty() {
            return Err(LlmError::EmptyOutput);
        }
        Ok(out)
    }
}
