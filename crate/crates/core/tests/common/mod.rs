//! Generators shared by the property and acceptance suites.
#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use clarifier::backend::{BackendPair, ScriptEntry, ScriptedBackend};
use clarifier::prompting::{format_question_list, ClarifyingQuestion};
use clarifier::session::{
    new_session, run_to_completion, ProblemDescription, ScriptedAnswers, SessionStatus, SessionTranscript,
};
use clarifier::{CommunicationLevel, QuestionTopic, SessionConfig};
use proptest::prelude::*;

pub fn topic() -> impl Strategy<Value = QuestionTopic> {
    (0..QuestionTopic::CANONICAL.len()).prop_map(|i| QuestionTopic::CANONICAL[i].clone())
}

pub fn level() -> impl Strategy<Value = CommunicationLevel> {
    prop_oneof![
        Just(CommunicationLevel::Under),
        Just(CommunicationLevel::Effective),
        Just(CommunicationLevel::Over)
    ]
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub description: String,
    pub config: SessionConfig,
    pub rounds: Vec<Vec<QuestionTopic>>,
    pub replies: Vec<String>,
}

pub fn scenario() -> impl Strategy<Value = Scenario> {
    let reply = prop_oneof![3 => "[a-z]{1,12}".prop_map(|s| format!("answer {s}")), 2 => Just(String::new()), 1 => Just("/stop".to_string())];
    (
        "[A-Za-z0-9 \u{e9}\u{4e2d}\"\\\\]{1,60}",
        1u32..=5,
        level(),
        1u32..=4,
        any::<bool>(),
        prop::collection::vec(prop::collection::vec(topic(), 0..6), 5),
        prop::collection::vec(reply, 0..25),
    )
        .prop_filter("description must not be blank", |s| !s.0.trim().is_empty())
        .prop_map(
            |(description, max_iterations, level, per_round, stop_empty, rounds, replies)| Scenario {
                description,
                config: SessionConfig {
                    max_iterations,
                    communication_level: level,
                    questions_per_round: per_round,
                    stop_when_no_questions: stop_empty,
                    ..SessionConfig::default()
                },
                rounds,
                replies,
            },
        )
}

pub fn play(s: &Scenario) -> SessionTranscript {
    let coder = ScriptedBackend::new(
        (0..6)
            .map(|i| ScriptEntry::new(format!("```python\nversion = {i}\n```")))
            .collect(),
    );
    let communicator = ScriptedBackend::new(
        s.rounds
            .iter()
            .enumerate()
            .map(|(r, topics)| {
                let qs: Vec<ClarifyingQuestion> = topics
                    .iter()
                    .enumerate()
                    .map(|(i, t)| ClarifyingQuestion::new(t.clone(), format!("round {r} item {i}?"), i as u32))
                    .collect();
                ScriptEntry::new(format_question_list(&qs))
            })
            .collect(),
    );
    let pair = BackendPair::Split {
        coder: Arc::new(coder),
        communicator: Arc::new(communicator),
    };
    let mut session = new_session(ProblemDescription::new(&s.description).unwrap(), s.config.clone()).unwrap();
    let mut answers = ScriptedAnswers::new(s.replies.clone());
    run_to_completion(&mut session, pair.coder(), pair.communicator(), &mut answers).unwrap();
    session
}

/// Structural invariants every finished session satisfies.
pub fn check_loop_invariants(t: &SessionTranscript) -> Result<(), TestCaseError> {
    let cfg = &t.config_snapshot;
    let max = cfg.max_iterations as usize;
    prop_assert!(t.status.is_done(), "status {:?}", t.status);
    prop_assert!(!t.revisions.is_empty() && t.revisions.len() <= max);
    for (i, rev) in t.revisions.iter().enumerate() {
        prop_assert_eq!(rev.iteration as usize, i);
    }
    match t.status {
        SessionStatus::DoneMaxIterations => prop_assert_eq!(t.revisions.len(), max),
        _ => prop_assert!(t.revisions.len() < max),
    }
    let refs: HashSet<String> = t.exchanges.iter().map(|e| e.question_ref().to_string()).collect();
    prop_assert_eq!(refs.len(), t.exchanges.len());
    for iteration in 0..t.revisions.len() as u32 {
        let asked = t.exchanges.iter().filter(|e| e.asked_at_iteration == iteration).count();
        prop_assert!(cfg.round_limit().is_none_or(|l| asked <= l));
    }
    for e in &t.exchanges {
        prop_assert!((e.asked_at_iteration as usize) < t.revisions.len());
        let later = t.revisions.iter().filter(|r| r.iteration > e.asked_at_iteration);
        let line = format!("Q: {}", e.question.text);
        match &e.answer {
            Some(a) if !a.is_skipped() => {
                for r in later {
                    prop_assert!(r.coder_prompt.contains(&line) && r.coder_prompt.contains(&a.text));
                }
            }
            _ => {
                for r in later {
                    prop_assert!(!r.coder_prompt.contains(&line));
                }
            }
        }
    }
    Ok(())
}
