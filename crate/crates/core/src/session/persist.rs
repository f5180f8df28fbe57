//! Transcript documents.
//!
//! A transcript is stored as a pretty-printed JSON object with the fields
//! `schema_version`, `description`, `config`, `revisions`, `exchanges`,
//! `status`, `created_at` and `updated_at`.

use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::config::SessionConfig;
use crate::error::TranscriptError;

use super::{CodeRevision, ProblemDescription, QAExchange, SessionStatus, SessionTranscript};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct DocumentRef<'a> {
    schema_version: u32,
    description: &'a ProblemDescription,
    config: &'a SessionConfig,
    revisions: &'a [CodeRevision],
    exchanges: &'a [QAExchange],
    status: SessionStatus,
    created_at: DateTime<Utc>,
    updated_at: DateTime<Utc>,
}

#[derive(Deserialize)]
struct Document {
    #[allow(dead_code)]
    schema_version: u64,
    description: ProblemDescription,
    config: SessionConfig,
    revisions: Vec<CodeRevision>,
    exchanges: Vec<QAExchange>,
    status: SessionStatus,
    created_at: DateTime<Utc>,
    updated_at: DateTime<Utc>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u64,
}

/// Serializes a transcript. Output ends with a newline.
pub fn save_transcript(session: &SessionTranscript) -> Vec<u8> {
    let doc = DocumentRef {
        schema_version: SCHEMA_VERSION,
        description: &session.description,
        config: &session.config_snapshot,
        revisions: &session.revisions,
        exchanges: &session.exchanges,
        status: session.status,
        created_at: session.created_at,
        updated_at: session.updated_at,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("transcript serialization is infallible");
    bytes.push(b'\n');
    bytes
}

/// Parses and validates a transcript document.
pub fn load_transcript(bytes: &[u8]) -> Result<SessionTranscript, TranscriptError> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(TranscriptError::from_json)?;
    if probe.schema_version != u64::from(SCHEMA_VERSION) {
        return Err(TranscriptError::UnsupportedVersion {
            found: probe.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    let doc: Document = serde_json::from_slice(bytes).map_err(TranscriptError::from_json)?;
    let transcript = SessionTranscript {
        description: doc.description,
        revisions: doc.revisions,
        exchanges: doc.exchanges,
        status: doc.status,
        config_snapshot: doc.config,
        created_at: doc.created_at,
        updated_at: doc.updated_at,
    };
    transcript.validate().map_err(TranscriptError::Invalid)?;
    Ok(transcript)
}

impl SessionTranscript {
    pub fn write_to(&self, path: &Path) -> Result<(), TranscriptError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| TranscriptError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(path, save_transcript(self)).map_err(|source| TranscriptError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_from(path: &Path) -> Result<SessionTranscript, TranscriptError> {
        let bytes = std::fs::read(path).map_err(|source| TranscriptError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        load_transcript(&bytes)
    }
}
