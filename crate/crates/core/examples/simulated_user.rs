//! A hidden spec answering questions in place of a person.
//!
//!     cargo run --example simulated_user

use clarifier::oracle::{answer_question, HiddenSpec};
use clarifier::prompting::{ClarifyingQuestion, QuestionRef};
use clarifier::session::PendingQuestion;
use clarifier::QuestionTopic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec: HiddenSpec = serde_json::from_str(
        r#"{
            "facts": { "Input Validation": "Reject negative n with ValueError." },
            "keyword_rules": [ { "regex": "memo(i[sz]e|ization)", "fact": "Memoization is fine." } ]
        }"#,
    )?;
    let asks = [
        (QuestionTopic::InputValidation, "What should happen for negative n?"),
        (QuestionTopic::PerformanceRequirements, "Should I use memoization?"),
        (QuestionTopic::Documentation, "Do you want docstrings?"),
    ];
    for (i, (topic, text)) in asks.into_iter().enumerate() {
        let pending = PendingQuestion {
            question_ref: QuestionRef::new(0, i as u32),
            question: ClarifyingQuestion::new(topic, text, i as u32),
        };
        let answer = answer_question(&pending, &spec);
        println!("Q: {text}\nA: {}\n", answer.text);
    }
    Ok(())
}
