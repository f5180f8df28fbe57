//! Chat-completion backends.
//!
//! All model traffic goes through [`Backend::complete`]. Two implementations
//! ship: [`ScriptedBackend`] replays a fixed list of responses and
//! [`HttpBackend`] talks to a chat-completions endpoint.
//!
//! `complete` is blocking. An instance may be reused sequentially; share one
//! between threads only with external serialization, or give each session
//! its own via [`Backend::fresh`].

mod http;
mod scripted;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use http::{HttpBackend, HttpConfig};
pub use scripted::{scripted_from_file, ScriptEntry, ScriptedBackend};

use crate::error::BackendError;
use crate::prompting::PromptText;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

/// Model parameters attached to every request a backend receives.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestParams {
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout: Duration,
}

impl Default for RequestParams {
    fn default() -> Self {
        RequestParams {
            model_id: "scripted".into(),
            temperature: 0.0,
            max_output_tokens: 2048,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendRequest {
    pub messages: Vec<ChatMessage>,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout: Duration,
}

impl BackendRequest {
    pub fn from_prompt(prompt: &PromptText, params: RequestParams) -> Self {
        BackendRequest {
            messages: prompt
                .role_messages
                .iter()
                .map(|(role, content)| ChatMessage {
                    role: *role,
                    content: content.clone(),
                })
                .collect(),
            model_id: params.model_id,
            temperature: params.temperature,
            max_output_tokens: params.max_output_tokens,
            timeout: params.timeout,
        }
    }

    /// All message contents joined, as the prompt text was built.
    pub fn text(&self) -> String {
        self.messages.iter().map(|m| m.content.as_str()).collect()
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let last = self
            .messages
            .last()
            .ok_or_else(|| BackendError::InvalidRequest("request has no messages".into()))?;
        if last.role == ChatRole::Assistant {
            return Err(BackendError::InvalidRequest(
                "last message must come from system or user".into(),
            ));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_output_tokens == 0 {
            return Err(BackendError::InvalidRequest(
                "max_output_tokens must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendResponse {
    pub content: String,
    pub finish_reason: FinishReason,
    pub usage: Option<Usage>,
}

/// A chat model, real or scripted.
pub trait Backend: Send + Sync {
    fn complete(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError>;

    /// A new instance with the same configuration and none of this
    /// instance's consumed state.
    fn fresh(&self) -> Arc<dyn Backend>;

    fn request_params(&self) -> RequestParams {
        RequestParams::default()
    }
}

/// The coder and communicator for one session. They may be the same
/// instance, as with an interleaved response script.
#[derive(Clone)]
pub enum BackendPair {
    Shared(Arc<dyn Backend>),
    Split {
        coder: Arc<dyn Backend>,
        communicator: Arc<dyn Backend>,
    },
}

impl BackendPair {
    pub fn coder(&self) -> &dyn Backend {
        match self {
            BackendPair::Shared(b) => b.as_ref(),
            BackendPair::Split { coder, .. } => coder.as_ref(),
        }
    }

    pub fn communicator(&self) -> &dyn Backend {
        match self {
            BackendPair::Shared(b) => b.as_ref(),
            BackendPair::Split { communicator, .. } => communicator.as_ref(),
        }
    }

    /// Fresh instances, keeping a shared backend shared.
    pub fn fresh(&self) -> BackendPair {
        match self {
            BackendPair::Shared(b) => BackendPair::Shared(b.fresh()),
            BackendPair::Split { coder, communicator } => BackendPair::Split {
                coder: coder.fresh(),
                communicator: communicator.fresh(),
            },
        }
    }
}

impl std::fmt::Debug for BackendPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendPair::Shared(_) => f.write_str("BackendPair::Shared"),
            BackendPair::Split { .. } => f.write_str("BackendPair::Split"),
        }
    }
}
