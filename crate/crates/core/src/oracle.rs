//! Rule-based simulated user.
//!
//! A [`HiddenSpec`] holds the facts a blurred task description leaves out.
//! The simulated user reveals a fact only when a question asks for it: by
//! wording (keyword rules, checked first, in order) or by topic. Anything
//! else gets the default answer.

use std::collections::BTreeMap;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::prompting::{Answer, AnswerOrigin};
use crate::session::{AnswerSource, PendingQuestion, RoundReply};
use crate::topic::QuestionTopic;

pub const DEFAULT_ANSWER: &str = "No preference; use your best judgment.";

/// Case-insensitive question matcher.
#[derive(Debug, Clone)]
pub enum Pattern {
    Contains(String),
    Regex(Regex),
}

impl Pattern {
    pub fn contains(needle: &str) -> Self {
        Pattern::Contains(needle.to_string())
    }

    pub fn regex(pattern: &str) -> Result<Self, regex::Error> {
        RegexBuilder::new(pattern)
            .case_insensitive(true)
            .build()
            .map(Pattern::Regex)
    }

    pub fn is_match(&self, text: &str) -> bool {
        match self {
            Pattern::Contains(needle) => text.to_lowercase().contains(&needle.to_lowercase()),
            Pattern::Regex(re) => re.is_match(text),
        }
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Pattern::Contains(a), Pattern::Contains(b)) => a == b,
            (Pattern::Regex(a), Pattern::Regex(b)) => a.as_str() == b.as_str(),
            _ => false,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    regex: Option<String>,
    fact: String,
}

/// `{"contains": "...", "fact": "..."}` or `{"regex": "...", "fact": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleDoc", into = "RuleDoc")]
pub struct KeywordRule {
    pub pattern: Pattern,
    pub fact: String,
}

impl TryFrom<RuleDoc> for KeywordRule {
    type Error = String;

    fn try_from(doc: RuleDoc) -> Result<Self, Self::Error> {
        if doc.fact.trim().is_empty() {
            return Err("keyword rule fact must not be empty".into());
        }
        let pattern = match (doc.contains, doc.regex) {
            (Some(needle), None) if !needle.is_empty() => Pattern::Contains(needle),
            (None, Some(re)) => Pattern::regex(&re).map_err(|e| format!("invalid regex {re:?}: {e}"))?,
            _ => return Err("keyword rule needs exactly one non-empty `contains` or `regex`".into()),
        };
        Ok(KeywordRule {
            pattern,
            fact: doc.fact,
        })
    }
}

impl From<KeywordRule> for RuleDoc {
    fn from(rule: KeywordRule) -> Self {
        match rule.pattern {
            Pattern::Contains(s) => RuleDoc {
                contains: Some(s),
                regex: None,
                fact: rule.fact,
            },
            Pattern::Regex(re) => RuleDoc {
                contains: None,
                regex: Some(re.as_str().into()),
                fact: rule.fact,
            },
        }
    }
}

fn default_answer() -> String {
    DEFAULT_ANSWER.to_string()
}

/// Information withheld from a blurred description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiddenSpec {
    #[serde(default)]
    pub facts: BTreeMap<QuestionTopic, String>,
    #[serde(default)]
    pub keyword_rules: Vec<KeywordRule>,
    #[serde(default = "default_answer")]
    pub default_answer: String,
}

impl Default for HiddenSpec {
    fn default() -> Self {
        HiddenSpec {
            facts: BTreeMap::new(),
            keyword_rules: Vec::new(),
            default_answer: default_answer(),
        }
    }
}

impl HiddenSpec {
    pub fn validate(&self) -> Result<(), String> {
        if let Some((topic, _)) = self.facts.iter().find(|(_, f)| f.trim().is_empty()) {
            return Err(format!("fact for topic `{topic}` is empty"));
        }
        if self.default_answer.trim().is_empty() {
            return Err("default_answer must not be empty".into());
        }
        Ok(())
    }

    /// Every fact text this hidden spec can reveal.
    pub fn fact_texts(&self) -> impl Iterator<Item = &str> {
        self.facts
            .values()
            .chain(self.keyword_rules.iter().map(|r| &r.fact))
            .map(String::as_str)
    }

    fn reply_text(&self, question: &PendingQuestion) -> &str {
        let q = &question.question;
        if let Some(rule) = self.keyword_rules.iter().find(|r| r.pattern.is_match(&q.text)) {
            return &rule.fact;
        }
        self.facts
            .get(&q.topic)
            .map(String::as_str)
            .unwrap_or(&self.default_answer)
    }
}

/// Answers one question from the hidden spec.
pub fn answer_question(question: &PendingQuestion, spec: &HiddenSpec) -> Answer {
    Answer {
        question_ref: question.question_ref.clone(),
        text: spec.reply_text(question).to_string(),
        source: AnswerOrigin::Simulated,
    }
}

/// An [`AnswerSource`] backed by a hidden spec. Never stops the session.
#[derive(Debug, Clone)]
pub struct SimulatedUser {
    spec: HiddenSpec,
}

impl SimulatedUser {
    pub fn new(spec: HiddenSpec) -> Self {
        SimulatedUser { spec }
    }
}

impl AnswerSource for SimulatedUser {
    fn answer_round(&mut self, pending: &[PendingQuestion]) -> RoundReply {
        RoundReply {
            answers: pending.iter().map(|p| answer_question(p, &self.spec)).collect(),
            stop: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompting::{ClarifyingQuestion, QuestionRef};

    const NEGATIVE_FACT: &str = "Negative n must raise a ValueError-style error.";

    fn pending(topic: QuestionTopic, text: &str) -> PendingQuestion {
        PendingQuestion {
            question_ref: QuestionRef::new(0, 0),
            question: ClarifyingQuestion::new(topic, text, 0),
        }
    }

    fn fib_spec() -> HiddenSpec {
        let mut spec = HiddenSpec::default();
        spec.facts.insert(QuestionTopic::InputValidation, NEGATIVE_FACT.into());
        spec
    }

    #[test]
    fn topic_fact_answers_matching_topic() {
        let q = pending(QuestionTopic::InputValidation, "What should happen when n is negative?");
        let a = answer_question(&q, &fib_spec());
        assert_eq!(a.text, NEGATIVE_FACT);
        assert_eq!(a.source, AnswerOrigin::Simulated);
        assert_eq!(a.question_ref, q.question_ref);
    }

    #[test]
    fn unmatched_question_gets_default_answer() {
        let q = pending(QuestionTopic::ConcurrencyAndParallelism, "Must it be thread-safe?");
        assert_eq!(answer_question(&q, &fib_spec()).text, DEFAULT_ANSWER);
    }

    #[test]
    fn keyword_rule_beats_topic_fact() {
        let mut spec = fib_spec();
        spec.facts.insert(QuestionTopic::InputValidation, "Y".into());
        spec.keyword_rules.push(KeywordRule {
            pattern: Pattern::contains("negative"),
            fact: "X".into(),
        });
        let q = pending(QuestionTopic::InputValidation, "What if n is NEGATIVE?");
        assert_eq!(answer_question(&q, &spec).text, "X");
        let other = pending(QuestionTopic::InputValidation, "Should n be validated?");
        assert_eq!(answer_question(&other, &spec).text, "Y");
    }

    #[test]
    fn regex_rules_are_case_insensitive_and_first_match_wins() {
        let mut spec = HiddenSpec::default();
        spec.keyword_rules.push(KeywordRule {
            pattern: Pattern::regex(r"large\s+values").unwrap(),
            fact: "A".into(),
        });
        spec.keyword_rules.push(KeywordRule {
            pattern: Pattern::contains("values"),
            fact: "B".into(),
        });
        let q = pending(QuestionTopic::Testing, "Test LARGE   values of n?");
        assert_eq!(answer_question(&q, &spec).text, "A");
    }

    #[test]
    fn spec_json_shape() {
        let json = r#"{
            "facts": {"Input Validation": "neg is an error"},
            "keyword_rules": [{"contains": "negative", "fact": "X"}, {"regex": "^why", "fact": "Z"}]
        }"#;
        let spec: HiddenSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.default_answer, DEFAULT_ANSWER);
        assert_eq!(spec.keyword_rules.len(), 2);
        let back: HiddenSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let bad = r#"{"keyword_rules": [{"regex": "(", "fact": "x"}]}"#;
        assert!(serde_json::from_str::<HiddenSpec>(bad)
            .unwrap_err()
            .to_string()
            .contains("invalid regex"));
        let both = r#"{"keyword_rules": [{"regex": "a", "contains": "b", "fact": "x"}]}"#;
        assert!(serde_json::from_str::<HiddenSpec>(both).is_err());
    }
}
