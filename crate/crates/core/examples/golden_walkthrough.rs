//! The Fibonacci session end to end with the shipped response script.
//!
//!     cargo run --example golden_walkthrough

use clarifier::backend::{scripted_from_file, BackendPair};
use clarifier::fixtures;
use clarifier::prompting::{Answer, AnswerOrigin};
use clarifier::session::{advance, new_session, record_answers, ProblemDescription, RoundReply};
use clarifier::SessionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let script = scripted_from_file(fixtures::golden_script_path())?;
    let pair = BackendPair::Shared(std::sync::Arc::new(script));
    let desc = ProblemDescription::new(fixtures::FIB_DESCRIPTION)?;
    let mut session = new_session(desc, SessionConfig::default())?;

    let pending = advance(&mut session, pair.coder(), pair.communicator())?;
    println!("revision 0:\n{}\n", session.revisions[0].code);
    for p in &pending {
        println!("[{}] {}: {}", p.question_ref, p.question.topic, p.question.text);
    }

    // Answer only the top question; the rest stay unanswered.
    let top = pending[0].question_ref.clone();
    let answer = Answer::new(top, fixtures::FIB_NEGATIVE_ANSWER, AnswerOrigin::Human)?;
    record_answers(
        &mut session,
        &pending,
        RoundReply {
            answers: vec![answer],
            stop: false,
        },
    )?;
    advance(&mut session, pair.coder(), pair.communicator())?;

    println!("\nrevision 1:\n{}\n", session.revisions[1].code);
    println!("status: {}", session.status);
    Ok(())
}
