//! Clarification sessions.
//!
//! A session alternates coder and communicator calls: the coder writes (or
//! refines) code, the communicator inspects the description and latest code
//! and asks questions, the user answers, and the answers go back to the
//! coder. [`SessionTranscript`] records every step.

mod engine;
mod persist;

use std::fmt;

use chrono::{DateTime, DurationRound, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

pub use engine::{
    advance, new_session, record_answers, run_iteration, run_to_completion, should_terminate, AnswerSource,
    PendingQuestion, RoundReply, ScriptedAnswers, TerminationDecision, TerminationReason,
};
pub use persist::{load_transcript, save_transcript, SCHEMA_VERSION};

use crate::config::SessionConfig;
use crate::error::ValidationError;
use crate::prompting::Answer;
use crate::prompting::{ClarifyingQuestion, QuestionRef};

/// The task statement handed to the coder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDescription {
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_id: Option<String>,
}

impl ProblemDescription {
    pub fn new(text: impl Into<String>) -> Result<Self, ValidationError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ValidationError::EmptyDescription);
        }
        Ok(ProblemDescription { text, source_id: None })
    }

    pub fn with_source(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = Some(source_id.into());
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn source_id(&self) -> Option<&str> {
        self.source_id.as_deref()
    }

    pub(crate) fn validate(&self) -> Result<(), ValidationError> {
        if self.text.trim().is_empty() {
            Err(ValidationError::EmptyDescription)
        } else {
            Ok(())
        }
    }
}

/// One generation of code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRevision {
    pub iteration: u32,
    pub code: String,
    #[serde(default)]
    pub language_hint: Option<String>,
    /// Exact prompt text sent to the coder.
    pub coder_prompt: String,
}

/// A question asked after some revision, with its answer once known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAExchange {
    pub question: ClarifyingQuestion,
    #[serde(default)]
    pub answer: Option<Answer>,
    pub asked_at_iteration: u32,
}

impl QAExchange {
    pub fn question_ref(&self) -> QuestionRef {
        QuestionRef::new(self.asked_at_iteration, self.question.source_order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    DoneMaxIterations,
    DoneNoQuestions,
    DoneUserStop,
    Failed,
}

impl SessionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionStatus::Active => "active",
            SessionStatus::DoneMaxIterations => "done_max_iterations",
            SessionStatus::DoneNoQuestions => "done_no_questions",
            SessionStatus::DoneUserStop => "done_user_stop",
            SessionStatus::Failed => "failed",
        }
    }

    pub fn is_active(self) -> bool {
        self == SessionStatus::Active
    }

    pub fn is_done(self) -> bool {
        matches!(
            self,
            SessionStatus::DoneMaxIterations | SessionStatus::DoneNoQuestions | SessionStatus::DoneUserStop
        )
    }
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full history of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionTranscript {
    pub description: ProblemDescription,
    pub revisions: Vec<CodeRevision>,
    pub exchanges: Vec<QAExchange>,
    pub status: SessionStatus,
    pub config_snapshot: SessionConfig,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl SessionTranscript {
    pub fn latest_revision(&self) -> Option<&CodeRevision> {
        self.revisions.last()
    }

    /// Number of questions asked across all rounds.
    pub fn questions_asked(&self) -> usize {
        self.exchanges.len()
    }

    /// Copy with both timestamps zeroed, for comparisons that ignore time.
    pub fn without_timestamps(&self) -> SessionTranscript {
        SessionTranscript {
            created_at: DateTime::UNIX_EPOCH,
            updated_at: DateTime::UNIX_EPOCH,
            ..self.clone()
        }
    }

    pub(crate) fn touch(&mut self) {
        self.updated_at = now();
    }

    /// Checks the structural invariants a well-formed transcript satisfies.
    pub fn validate(&self) -> Result<(), String> {
        self.description.validate().map_err(|e| e.to_string())?;
        self.config_snapshot.validate().map_err(|e| e.to_string())?;
        for (i, rev) in self.revisions.iter().enumerate() {
            if rev.iteration as usize != i {
                return Err(format!("revision {i} has iteration {} (expected {i})", rev.iteration));
            }
        }
        let next_iteration = self.revisions.len() as u32;
        let mut seen = std::collections::HashSet::new();
        for ex in &self.exchanges {
            if ex.asked_at_iteration > next_iteration {
                return Err(format!(
                    "question {} asked at iteration {} but only {} revisions exist",
                    ex.question_ref(),
                    ex.asked_at_iteration,
                    self.revisions.len()
                ));
            }
            if ex.question.text.trim().is_empty() {
                return Err(format!("question {} has empty text", ex.question_ref()));
            }
            if !seen.insert(ex.question_ref()) {
                return Err(format!("question {} appears twice", ex.question_ref()));
            }
            if let Some(answer) = &ex.answer {
                if answer.question_ref != ex.question_ref() {
                    return Err(format!(
                        "answer refers to {} but is attached to {}",
                        answer.question_ref,
                        ex.question_ref()
                    ));
                }
                answer.validate().map_err(|e| format!("{}: {e}", ex.question_ref()))?;
            }
        }
        if self.status.is_done() && self.revisions.is_empty() {
            return Err(format!("status {} requires at least one revision", self.status));
        }
        Ok(())
    }
}

/// Current UTC time truncated to whole seconds.
pub(crate) fn now() -> DateTime<Utc> {
    let t = Utc::now();
    t.duration_trunc(TimeDelta::seconds(1)).unwrap_or(t)
}
