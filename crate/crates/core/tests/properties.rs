mod common;

use std::collections::HashSet;

use clarifier::prompting::{format_question_list, parse_question_list, rank_and_select, ClarifyingQuestion};
use clarifier::session::{load_transcript, save_transcript, SessionStatus};
use clarifier::{CommunicationLevel, QuestionTopic, SessionConfig, TopicWeights};
use common::{check_loop_invariants, level, play, scenario, topic};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = TopicWeights> {
    prop::collection::vec(0u8..=10, 15).prop_map(|ws| {
        let mut w = TopicWeights::new();
        for (t, v) in QuestionTopic::CANONICAL.into_iter().zip(ws) {
            w.set(t, v as f64);
        }
        w
    })
}

fn question_list() -> impl Strategy<Value = Vec<ClarifyingQuestion>> {
    prop::collection::vec(topic(), 0..30).prop_map(|topics| {
        topics
            .into_iter()
            .enumerate()
            .map(|(i, t)| ClarifyingQuestion::new(t, format!("question {i}?"), i as u32))
            .collect()
    })
}

fn config(level: CommunicationLevel, per_round: u32, weights: TopicWeights) -> SessionConfig {
    SessionConfig {
        communication_level: level,
        questions_per_round: per_round,
        topic_priorities: weights,
        ..SessionConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ranking_is_a_sorted_bounded_selection(qs in question_list(), lvl in level(), k in 1u32..6, w in weights()) {
        let cfg = config(lvl, k, w.clone());
        let selected = rank_and_select(&qs, &cfg);
        let expected_len = cfg.round_limit().map_or(qs.len(), |l| l.min(qs.len()));
        prop_assert_eq!(selected.len(), expected_len);

        for pair in selected.windows(2) {
            prop_assert!(pair[0].score > pair[1].score
                || (pair[0].score == pair[1].score && pair[0].source_order < pair[1].source_order));
        }
        let chosen: HashSet<u32> = selected.iter().map(|q| q.source_order).collect();
        prop_assert_eq!(chosen.len(), selected.len());
        if let Some(lowest) = selected.last() {
            for q in qs.iter().filter(|q| !chosen.contains(&q.source_order)) {
                prop_assert!(w.get(&q.topic) <= lowest.score);
            }
        }
        for q in &selected {
            prop_assert_eq!(q.score, w.get(&q.topic));
            prop_assert!(qs.iter().any(|o| o.source_order == q.source_order && o.text == q.text));
        }
    }

    #[test]
    fn levels_nest(qs in question_list(), k in 1u32..6, w in weights()) {
        let order = |lvl| rank_and_select(&qs, &config(lvl, k, w.clone())).into_iter().map(|q| q.source_order).collect::<Vec<_>>();
        let (under, effective, over) = (order(CommunicationLevel::Under), order(CommunicationLevel::Effective), order(CommunicationLevel::Over));
        prop_assert!(effective.starts_with(&under));
        prop_assert!(over.starts_with(&effective));
        prop_assert!(under.len() <= effective.len() && effective.len() <= over.len());
    }

    #[test]
    fn positive_scaling_keeps_selection(qs in question_list(), lvl in level(), k in 1u32..6, w in weights(), factor in 0.01f64..100.0) {
        let a = rank_and_select(&qs, &config(lvl, k, w.clone()));
        let b = rank_and_select(&qs, &config(lvl, k, w.scaled(factor)));
        let ids = |v: &[ClarifyingQuestion]| v.iter().map(|q| q.source_order).collect::<Vec<_>>();
        prop_assert_eq!(ids(&a), ids(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parser_is_total(raw in "\\PC{0,400}") {
        let qs = parse_question_list(&raw);
        for (i, q) in qs.iter().enumerate() {
            prop_assert_eq!(q.source_order, i as u32);
            prop_assert!(!q.text.trim().is_empty());
        }
    }

    #[test]
    fn parser_is_total_on_list_like_text(lines in prop::collection::vec(
        prop_oneof![
            "[0-9]{1,2}[.)] [A-Za-z ?:*]{0,40}",
            "[-*+] [A-Za-z ?:]{0,40}",
            "#{1,3} [A-Za-z &]{0,30}",
            "\\*\\*[A-Za-z ]{0,20}\\*\\*:?",
            "[A-Za-z &]{1,30}:",
            "  +[A-Za-z ?]{0,30}",
            "[A-Za-z ?]{0,40}",
        ], 0..40)) {
        let raw = lines.join("\n");
        let qs = parse_question_list(&raw);
        let texts: Vec<&str> = qs.iter().map(|q| q.text.as_str()).collect();
        prop_assert!(texts.iter().all(|t| !t.trim().is_empty()), "{:?}", texts);
    }

    #[test]
    fn format_then_parse_round_trips(items in prop::collection::vec((topic(), "[a-z][a-z ]{0,30}[a-z]"), 0..20)) {
        let qs: Vec<ClarifyingQuestion> = items
            .iter()
            .enumerate()
            .map(|(i, (t, text))| ClarifyingQuestion::new(t.clone(), format!("{text}?"), i as u32))
            .collect();
        let parsed = parse_question_list(&format_question_list(&qs));
        prop_assert_eq!(parsed, qs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generated_sessions_keep_loop_invariants(s in scenario()) {
        let t = play(&s);
        check_loop_invariants(&t)?;
        if s.replies.iter().take(t.exchanges.len()).all(|r| r != "/stop") && s.config.stop_when_no_questions {
            prop_assert_ne!(t.status, SessionStatus::DoneUserStop);
        }
    }

    #[test]
    fn transcripts_round_trip(s in scenario()) {
        let t = play(&s);
        let bytes = save_transcript(&t);
        let back = load_transcript(&bytes).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(save_transcript(&back), bytes);
    }
}
