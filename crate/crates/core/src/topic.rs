//! Question topic taxonomy.
//!
//! Fifteen canonical topics cover the clarifying questions a communicator
//! typically raises about a small coding task. Anything else is carried as
//! [`QuestionTopic::Other`] with its original (trimmed) label.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Topic a clarifying question belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuestionTopic {
    InputValidation,
    ErrorHandling,
    PerformanceRequirements,
    FunctionSignature,
    OutputType,
    DefaultValues,
    Documentation,
    Testing,
    LanguageAndEnvironment,
    AlgorithmChoice,
    UsabilityAndExtensibility,
    SecurityConsiderations,
    ConcurrencyAndParallelism,
    VersionControlAndDeployment,
    UseCaseAndContext,
    /// Label outside the canonical taxonomy. Never empty, never a canonical name.
    Other(String),
}

impl QuestionTopic {
    /// Canonical topics in taxonomy order.
    pub const CANONICAL: [QuestionTopic; 15] = [
        QuestionTopic::InputValidation,
        QuestionTopic::ErrorHandling,
        QuestionTopic::PerformanceRequirements,
        QuestionTopic::FunctionSignature,
        QuestionTopic::OutputType,
        QuestionTopic::DefaultValues,
        QuestionTopic::Documentation,
        QuestionTopic::Testing,
        QuestionTopic::LanguageAndEnvironment,
        QuestionTopic::AlgorithmChoice,
        QuestionTopic::UsabilityAndExtensibility,
        QuestionTopic::SecurityConsiderations,
        QuestionTopic::ConcurrencyAndParallelism,
        QuestionTopic::VersionControlAndDeployment,
        QuestionTopic::UseCaseAndContext,
    ];

    /// Label used for entries that appear before any topic header.
    pub const UNCATEGORIZED: &'static str = "uncategorized";

    /// Builds a topic from a free-form label, mapping canonical names onto
    /// their variant. Returns `None` for a blank label.
    pub fn other(label: &str) -> Option<Self> {
        let trimmed = label.trim();
        if trimmed.is_empty() {
            None
        } else {
            Some(classify_topic(trimmed))
        }
    }

    pub fn uncategorized() -> Self {
        QuestionTopic::Other(Self::UNCATEGORIZED.to_string())
    }

    /// Human-readable name, e.g. `"Input Validation"`.
    pub fn label(&self) -> &str {
        match self {
            QuestionTopic::InputValidation => "Input Validation",
            QuestionTopic::ErrorHandling => "Error Handling",
            QuestionTopic::PerformanceRequirements => "Performance Requirements",
            QuestionTopic::FunctionSignature => "Function Signature",
            QuestionTopic::OutputType => "Output Type",
            QuestionTopic::DefaultValues => "Default Values",
            QuestionTopic::Documentation => "Documentation",
            QuestionTopic::Testing => "Testing",
            QuestionTopic::LanguageAndEnvironment => "Language and Environment",
            QuestionTopic::AlgorithmChoice => "Algorithm Choice",
            QuestionTopic::UsabilityAndExtensibility => "Usability and Extensibility",
            QuestionTopic::SecurityConsiderations => "Security Considerations",
            QuestionTopic::ConcurrencyAndParallelism => "Concurrency and Parallelism",
            QuestionTopic::VersionControlAndDeployment => "Version Control and Deployment",
            QuestionTopic::UseCaseAndContext => "Use Case and Context",
            QuestionTopic::Other(label) => label,
        }
    }

    pub fn is_canonical(&self) -> bool {
        !matches!(self, QuestionTopic::Other(_))
    }
}

impl fmt::Display for QuestionTopic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Lowercase, drop everything but letters and digits, and treat "&" as "and".
fn normalize(label: &str) -> String {
    label
        .replace('&', " and ")
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Maps a header label onto the taxonomy.
///
/// Matching ignores case, whitespace and punctuation. Labels that match no
/// canonical topic become `Other(label.trim())`.
pub fn classify_topic(label: &str) -> QuestionTopic {
    let key = normalize(label);
    if !key.is_empty() {
        for topic in QuestionTopic::CANONICAL {
            if normalize(topic.label()) == key {
                return topic;
            }
        }
    }
    QuestionTopic::Other(label.trim().to_string())
}

impl Serialize for QuestionTopic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for QuestionTopic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        QuestionTopic::other(&label).ok_or_else(|| serde::de::Error::custom("topic label must not be empty"))
    }
}
