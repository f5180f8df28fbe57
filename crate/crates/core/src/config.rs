//! Session loop configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::topic::QuestionTopic;

/// How talkative the communicator is allowed to be in each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommunicationLevel {
    /// One question per round.
    Under,
    /// `questions_per_round` questions per round.
    #[default]
    Effective,
    /// Every parsed question.
    Over,
}

impl CommunicationLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            CommunicationLevel::Under => "under",
            CommunicationLevel::Effective => "effective",
            CommunicationLevel::Over => "over",
        }
    }
}

impl fmt::Display for CommunicationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CommunicationLevel {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "under" => Ok(CommunicationLevel::Under),
            "effective" => Ok(CommunicationLevel::Effective),
            "over" => Ok(CommunicationLevel::Over),
            other => Err(ConfigError::Invalid(format!(
                "unknown communication level `{other}` (expected under, effective or over)"
            ))),
        }
    }
}

/// Per-topic ranking weights. Topics without an entry weigh 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicWeights(BTreeMap<QuestionTopic, f64>);

impl TopicWeights {
    pub fn new() -> Self {
        TopicWeights(BTreeMap::new())
    }

    pub fn get(&self, topic: &QuestionTopic) -> f64 {
        self.0.get(topic).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, topic: QuestionTopic, weight: f64) {
        self.0.insert(topic, weight);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&QuestionTopic, f64)> {
        self.0.iter().map(|(t, w)| (t, *w))
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        TopicWeights(self.0.iter().map(|(t, w)| (t.clone(), w * factor)).collect())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for (topic, weight) in &self.0 {
            if !weight.is_finite() || *weight < 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "weight for topic `{topic}` must be finite and non-negative, got {weight}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for TopicWeights {
    /// Correctness-affecting topics first: Input Validation 10, Error
    /// Handling 9, Output Type 8, Testing 7, Function Signature 6, Algorithm
    /// Choice 5, then the remaining nine in taxonomy order spaced evenly
    /// from 4 down to 1.
    fn default() -> Self {
        use QuestionTopic::*;
        let mut weights = TopicWeights::new();
        let leading = [
            (InputValidation, 10.0),
            (ErrorHandling, 9.0),
            (OutputType, 8.0),
            (Testing, 7.0),
            (FunctionSignature, 6.0),
            (AlgorithmChoice, 5.0),
        ];
        for (topic, weight) in leading {
            weights.set(topic, weight);
        }
        let remaining: Vec<QuestionTopic> = QuestionTopic::CANONICAL
            .into_iter()
            .filter(|t| !weights.0.contains_key(t))
            .collect();
        let step = 3.0 / (remaining.len() - 1) as f64;
        for (i, topic) in remaining.into_iter().enumerate() {
            weights.set(topic, 4.0 - step * i as f64);
        }
        weights
    }
}

/// Controls for one clarification session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub max_iterations: u32,
    pub communication_level: CommunicationLevel,
    pub questions_per_round: u32,
    pub topic_priorities: TopicWeights,
    pub stop_when_no_questions: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            max_iterations: 3,
            communication_level: CommunicationLevel::Effective,
            questions_per_round: 3,
            topic_priorities: TopicWeights::default(),
            stop_when_no_questions: true,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_iterations < 1 {
            return Err(ConfigError::Invalid("max_iterations must be at least 1".into()));
        }
        if self.questions_per_round < 1 {
            return Err(ConfigError::Invalid("questions_per_round must be at least 1".into()));
        }
        self.topic_priorities.validate()
    }

    /// Maximum number of questions selected per round, `None` when unbounded.
    pub fn round_limit(&self) -> Option<usize> {
        match self.communication_level {
            CommunicationLevel::Under => Some(1),
            CommunicationLevel::Effective => Some(self.questions_per_round as usize),
            CommunicationLevel::Over => None,
        }
    }
}
