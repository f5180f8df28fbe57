//! Saving a transcript and reading it back.
//!
//!     cargo run --example replay_transcript

use clarifier::backend::{scripted_from_file, BackendPair};
use clarifier::fixtures;
use clarifier::session::{new_session, run_to_completion, ProblemDescription, ScriptedAnswers, SessionTranscript};
use clarifier::SessionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pair = BackendPair::Shared(std::sync::Arc::new(scripted_from_file(fixtures::golden_script_path())?));
    let mut session = new_session(
        ProblemDescription::new(fixtures::FIB_DESCRIPTION)?,
        SessionConfig::default(),
    )?;
    // An empty reply skips a question.
    let mut answers = ScriptedAnswers::new([fixtures::FIB_NEGATIVE_ANSWER, "", ""]);
    run_to_completion(&mut session, pair.coder(), pair.communicator(), &mut answers)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("fib.json");
    session.write_to(&path)?;
    let loaded = SessionTranscript::read_from(&path)?;
    assert_eq!(loaded, session);

    for ex in &loaded.exchanges {
        let answer = match &ex.answer {
            Some(a) if a.is_skipped() => "(skipped)",
            Some(a) => a.text.as_str(),
            None => "(unanswered)",
        };
        println!("[{}] {} -> {answer}", ex.question_ref(), ex.question.text);
    }
    println!(
        "\n{} bytes on disk, status {}",
        std::fs::metadata(&path)?.len(),
        loaded.status
    );
    Ok(())
}
