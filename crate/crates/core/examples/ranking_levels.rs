//! How the communication level and topic weights pick questions.
//!
//!     cargo run --example ranking_levels

use clarifier::fixtures;
use clarifier::prompting::{parse_question_list, rank_and_select};
use clarifier::{CommunicationLevel, QuestionTopic, SessionConfig};

fn main() {
    let questions = parse_question_list(fixtures::TAXONOMY_QUESTIONS);
    for level in [
        CommunicationLevel::Under,
        CommunicationLevel::Effective,
        CommunicationLevel::Over,
    ] {
        let config = SessionConfig {
            communication_level: level,
            ..SessionConfig::default()
        };
        let picked = rank_and_select(&questions, &config);
        println!("{level}: {} of {}", picked.len(), questions.len());
        for q in picked.iter().take(4) {
            println!("  {:>5.2}  {}: {}", q.score, q.topic, q.text);
        }
    }

    // Someone who cares most about tests.
    let mut config = SessionConfig::default();
    config.topic_priorities.set(QuestionTopic::Testing, 20.0);
    println!("\nwith Testing boosted:");
    for q in rank_and_select(&questions, &config) {
        println!("  {:>5.2}  {}: {}", q.score, q.topic, q.text);
    }
}
