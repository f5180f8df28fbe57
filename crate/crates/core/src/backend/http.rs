use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use tracing::{debug, warn};

use crate::error::BackendError;

use super::{Backend, BackendRequest, BackendResponse, FinishReason, RequestParams, Usage};

/// Settings for a chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_seconds: u64,
    pub max_retries: u32,
    pub max_output_tokens: u32,
    /// Sent as a bearer token. Usually taken from `LLM_API_KEY`.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    /// First retry delay; doubles on each further attempt.
    pub backoff_millis: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            timeout_seconds: 60,
            max_retries: 2,
            max_output_tokens: 2048,
            api_key: None,
            backoff_millis: 500,
        }
    }
}

/// Blocking client for OpenAI-style `chat/completions` endpoints.
///
/// Timeouts, connection failures and 5xx responses are retried up to
/// `max_retries` times with exponential backoff; 4xx responses are not.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct CompletionPayload {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<UsagePayload>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct UsagePayload {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        HttpBackend { config, agent }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        let body = json!({
            "model": request.model_id,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        let mut call = self
            .agent
            .post(&self.endpoint())
            .config()
            .timeout_global(Some(request.timeout))
            .build()
            .header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let seconds = request.timeout.as_secs();
        let mut response = call.send(body.to_string()).map_err(|e| transport_error(e, seconds))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| transport_error(e, seconds))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status {
                status,
                body: truncate(&text, 500),
            });
        }
        parse_completion(&text)
    }
}

fn transport_error(err: ureq::Error, seconds: u64) -> BackendError {
    match err {
        ureq::Error::Timeout(_) => BackendError::Timeout { seconds },
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => BackendError::Timeout { seconds },
        other => BackendError::Transport(other.to_string()),
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}…", &s[..i]),
        None => s.to_string(),
    }
}

fn parse_completion(text: &str) -> Result<BackendResponse, BackendError> {
    let payload: CompletionPayload = serde_json::from_str(text).map_err(|e| BackendError::Malformed(e.to_string()))?;
    let choice = payload
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| BackendError::Malformed("response has no choices".into()))?;
    let finish_reason = match choice.finish_reason.as_deref() {
        None | Some("stop") => FinishReason::Stop,
        Some("length") => FinishReason::Length,
        Some(_) => FinishReason::Error,
    };
    Ok(BackendResponse {
        content: choice.message.content.unwrap_or_default(),
        finish_reason,
        usage: payload.usage.map(|u| Usage {
            prompt_tokens: u.prompt_tokens,
            output_tokens: u.completion_tokens,
        }),
    })
}

impl Backend for HttpBackend {
    fn complete(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        request.validate()?;
        let mut attempt = 0;
        loop {
            match self.attempt(request) {
                Ok(response) => return Ok(response),
                Err(err) if err.is_transient() && attempt < self.config.max_retries => {
                    let delay = Duration::from_millis(self.config.backoff_millis << attempt.min(16));
                    warn!(attempt = attempt + 1, ?delay, error = %err, "retrying chat completion");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                Err(err) => {
                    debug!(error = %err, "chat completion failed");
                    return Err(err);
                }
            }
        }
    }

    fn fresh(&self) -> Arc<dyn Backend> {
        Arc::new(self.clone())
    }

    fn request_params(&self) -> RequestParams {
        RequestParams {
            model_id: self.config.model.clone(),
            temperature: self.config.temperature,
            max_output_tokens: self.config.max_output_tokens,
            timeout: Duration::from_secs(self.config.timeout_seconds),
        }
    }
}
