use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{BackendError, ScriptError};

use super::{Backend, BackendRequest, BackendResponse, FinishReason};

/// One scripted reply. When `matcher` is set the request text must contain
/// it, which keeps a replay from silently drifting out of step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matcher: Option<String>,
    pub content: String,
}

impl ScriptEntry {
    pub fn new(content: impl Into<String>) -> Self {
        ScriptEntry {
            matcher: None,
            content: content.into(),
        }
    }

    pub fn matching(matcher: impl Into<String>, content: impl Into<String>) -> Self {
        ScriptEntry {
            matcher: Some(matcher.into()),
            content: content.into(),
        }
    }
}

/// Replays responses in order.
#[derive(Debug)]
pub struct ScriptedBackend {
    entries: Arc<Vec<ScriptEntry>>,
    state: Mutex<ReplayState>,
}

#[derive(Debug, Default)]
struct ReplayState {
    cursor: usize,
    calls: usize,
    prompts: Vec<String>,
}

impl ScriptedBackend {
    pub fn new(entries: Vec<ScriptEntry>) -> Self {
        ScriptedBackend {
            entries: Arc::new(entries),
            state: Mutex::default(),
        }
    }

    /// Parses a script document: a JSON list of `{matcher?, content}`.
    /// Blank input is an empty script.
    pub fn from_json_str(text: &str) -> Result<Self, ScriptError> {
        parse_script(text, Path::new("<inline>"))
    }

    pub fn entries(&self) -> &[ScriptEntry] {
        &self.entries
    }

    /// Index of the next entry to replay.
    pub fn cursor(&self) -> usize {
        self.lock().cursor
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor() >= self.entries.len()
    }

    /// Prompt text of every request received so far, including rejected ones.
    pub fn prompts(&self) -> Vec<String> {
        self.lock().prompts.clone()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, ReplayState> {
        self.state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        request.validate()?;
        let text = request.text();
        let mut state = self.lock();
        state.calls += 1;
        let call = state.calls;
        state.prompts.push(text.clone());

        let index = state.cursor;
        let entry = self.entries.get(index).ok_or(BackendError::ScriptExhausted {
            call,
            available: self.entries.len(),
        })?;
        if let Some(matcher) = &entry.matcher {
            if !text.contains(matcher.as_str()) {
                return Err(BackendError::MatcherMismatch {
                    index,
                    matcher: matcher.clone(),
                });
            }
        }
        state.cursor += 1;
        Ok(BackendResponse {
            content: entry.content.clone(),
            finish_reason: FinishReason::Stop,
            usage: None,
        })
    }

    fn fresh(&self) -> Arc<dyn Backend> {
        Arc::new(ScriptedBackend {
            entries: Arc::clone(&self.entries),
            state: Mutex::default(),
        })
    }
}

fn parse_script(text: &str, path: &Path) -> Result<ScriptedBackend, ScriptError> {
    if text.trim().is_empty() {
        return Ok(ScriptedBackend::new(Vec::new()));
    }
    let raw: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| ScriptError::Shape {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let entries = raw
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            serde_json::from_value::<ScriptEntry>(value).map_err(|e| ScriptError::Entry {
                path: path.to_path_buf(),
                index,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScriptedBackend::new(entries))
}

/// Loads a response script from disk.
pub fn scripted_from_file(path: impl AsRef<Path>) -> Result<ScriptedBackend, ScriptError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScriptError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_script(&text, path)
}
