//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

use crate::session::SessionStatus;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("problem description must not be empty")]
    EmptyDescription,
    #[error("answer text must be empty when skipped and non-empty otherwise")]
    AnswerText,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// Failure of a single `complete` call.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("invalid backend request: {0}")]
    InvalidRequest(String),
    #[error("script exhausted: no response left for call #{call} ({available} scripted)")]
    ScriptExhausted { call: usize, available: usize },
    #[error("script entry {index} expects the request to contain {matcher:?}, but it does not")]
    MatcherMismatch { index: usize, matcher: String },
    #[error("request timed out after {seconds} s")]
    Timeout { seconds: u64 },
    #[error("backend returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed backend payload: {0}")]
    Malformed(String),
    #[error("transport error: {0}")]
    Transport(String),
}

impl BackendError {
    /// Timeouts, 5xx responses and connection failures are worth retrying.
    pub fn is_transient(&self) -> bool {
        match self {
            BackendError::Timeout { .. } | BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

/// Failure to load a response script.
#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("cannot read script {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("script {path} is not a list of entries: {message}")]
    Shape { path: PathBuf, message: String },
    #[error("script {path}, entry {index}: {message}")]
    Entry {
        path: PathBuf,
        index: usize,
        message: String,
    },
}

/// Which side of the loop a backend call served.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Coder,
    Communicator,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Coder => "coder",
            Role::Communicator => "communicator",
        })
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("session is no longer active (status {0})")]
    NotActive(SessionStatus),
    #[error("{role} backend failed: {source}")]
    Backend {
        role: Role,
        #[source]
        source: BackendError,
    },
    #[error("coder produced no code")]
    NoCode,
    #[error("unknown question reference `{0}`")]
    UnknownQuestion(String),
    #[error("question `{0}` answered more than once")]
    DuplicateAnswer(String),
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("transcript parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported transcript schema_version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u32 },
    #[error("invalid transcript: {0}")]
    Invalid(String),
    #[error("cannot access transcript {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TranscriptError {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        TranscriptError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed task file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("task {id} in {path}: {message}")]
    InvalidTask { id: String, path: PathBuf, message: String },
    #[error("duplicate task id `{id}` in {first} and {second}")]
    DuplicateId {
        id: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("task `{0}` has results for only one arm")]
    Unpaired(String),
    #[error("task `{task}`: {message}")]
    Backend { task: String, message: String },
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
}
