use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LanguageModel, LlmError, LlmKind, PromptBundle};

#[derive(Debug, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Body of `POST {endpoint}/chat`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChatResponseBody {
    pub content: String,
}

pub fn decode_chat_response(body: &[u8]) -> Result<String, LlmError> {
    let resp: ChatResponseBody =
        serde_json::from_slice(body).map_err(|e| LlmError::Protocol(format!("bad response body: {e}")))?;
    if resp.content.trim().is_empty() {
        return Err(LlmError::EmptyOutput);
    }
    Ok(resp.content)
}

#[derive(Clone, Debug)]
pub struct RemoteChatConfig {
    /// Base URL; requests go to `{endpoint}/chat`.
    pub endpoint: String,
    pub model: String,
    pub timeout: Duration,
}

impl RemoteChatConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), model: model.into(), timeout: Duration::from_secs(30) }
    }
}

pub struct RemoteChatModel {
    config: RemoteChatConfig,
    agent: ureq::Agent,
}

impl RemoteChatModel {
    pub fn new(config: RemoteChatConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }
}

impl LanguageModel for RemoteChatModel {
    fn kind(&self) -> LlmKind {
        LlmKind::RemoteHttp
    }

    fn name(&self) -> String {
        format!("llm {} at {}", self.config.model, self.config.endpoint)
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError> {
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages: bundle
                .messages()
                .into_iter()
                .map(|(role, content)| ChatMessage { role: role.into(), content })
                .collect(),
        };
        let url = format!("{}/chat", self.config.endpoint.trim_end_matches('/'));
        let classify = |e: ureq::Error| match e {
            ureq::Error::Timeout(t) => LlmError::Timeout(t.to_string()),
            other => LlmError::Unavailable(other.to_string()),
        };
        let mut resp = self.agent.post(&url).send_json(&request).map_err(classify)?;
        let status = resp.status();
        let body = resp.body_mut().read_to_vec().map_err(classify)?;
        if status.is_server_error() {
            return Err(LlmError::Unavailable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(LlmError::Protocol(format!("HTTP {status}")));
        }
        decode_chat_response(&body)
    }
}
