//! Prompt construction, question parsing and question selection.
//!
//! The communicator is asked for topic-grouped questions; its free-text reply
//! is parsed back into [`ClarifyingQuestion`]s, scored by topic weight and cut
//! down to the configured communication level. The coder prompt folds every
//! answered question back into the next generation request.

mod coder;
mod communicator;
mod questions;
mod rank;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use coder::{build_coder_prompt, extract_code, CODER_INSTRUCTION, CODER_OUTPUT_DIRECTIVE};
pub use communicator::{build_communicator_prompt, COMMUNICATOR_INSTRUCTION, FORMAT_DIRECTIVE};
pub use questions::{format_question_list, parse_question_list};
pub use rank::rank_and_select;

use crate::backend::ChatRole;
use crate::error::ValidationError;
use crate::topic::QuestionTopic;

/// One question raised by the communicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarifyingQuestion {
    pub topic: QuestionTopic,
    pub text: String,
    /// Position in the communicator's raw output.
    pub source_order: u32,
    /// Ranking score; 0 until [`rank_and_select`] assigns one.
    pub score: f64,
}

impl ClarifyingQuestion {
    pub fn new(topic: QuestionTopic, text: impl Into<String>, source_order: u32) -> Self {
        ClarifyingQuestion {
            topic,
            text: text.into(),
            source_order,
            score: 0.0,
        }
    }
}

/// Stable identifier of an asked question within one transcript:
/// `q<iteration>.<source_order>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuestionRef(String);

impl QuestionRef {
    pub fn new(asked_at_iteration: u32, source_order: u32) -> Self {
        QuestionRef(format!("q{asked_at_iteration}.{source_order}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for QuestionRef {
    fn from(s: &str) -> Self {
        QuestionRef(s.to_string())
    }
}

impl fmt::Display for QuestionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Who produced an answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerOrigin {
    Human,
    Simulated,
    Skipped,
}

/// Reply to one clarifying question. Skipped answers carry no text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub question_ref: QuestionRef,
    pub text: String,
    pub source: AnswerOrigin,
}

impl Answer {
    pub fn new(
        question_ref: QuestionRef,
        text: impl Into<String>,
        source: AnswerOrigin,
    ) -> Result<Self, ValidationError> {
        let answer = Answer {
            question_ref,
            text: text.into(),
            source,
        };
        answer.validate()?;
        Ok(answer)
    }

    pub fn skipped(question_ref: QuestionRef) -> Self {
        Answer {
            question_ref,
            text: String::new(),
            source: AnswerOrigin::Skipped,
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.source == AnswerOrigin::Skipped
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let empty = self.text.trim().is_empty();
        match (self.is_skipped(), empty) {
            (true, _) if !self.text.is_empty() => Err(ValidationError::AnswerText),
            (false, true) => Err(ValidationError::AnswerText),
            _ => Ok(()),
        }
    }
}

/// A prompt split into chat messages. `text` is always the concatenation of
/// the message contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptText {
    pub text: String,
    pub role_messages: Vec<(ChatRole, String)>,
}

impl PromptText {
    pub fn from_messages(role_messages: Vec<(ChatRole, String)>) -> Self {
        let text = role_messages.iter().map(|(_, c)| c.as_str()).collect();
        PromptText { text, role_messages }
    }
}
