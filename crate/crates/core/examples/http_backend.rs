//! One session against a real chat-completions endpoint.
//!
//!     LLM_API_KEY=... cargo run --example http_backend -- "reverse a linked list"
//!
//! `LLM_BASE_URL` and `LLM_MODEL` override the endpoint and model. Every
//! question is answered with the default "no preference" reply.

use std::sync::Arc;

use clarifier::backend::{BackendPair, HttpBackend, HttpConfig};
use clarifier::oracle::{HiddenSpec, SimulatedUser};
use clarifier::session::{new_session, run_to_completion, ProblemDescription};
use clarifier::SessionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let Ok(api_key) = std::env::var("LLM_API_KEY") else {
        eprintln!("set LLM_API_KEY to run this example");
        return Ok(());
    };
    let mut config = HttpConfig {
        api_key: Some(api_key),
        ..HttpConfig::default()
    };
    if let Ok(url) = std::env::var("LLM_BASE_URL") {
        config.base_url = url;
    }
    if let Ok(model) = std::env::var("LLM_MODEL") {
        config.model = model;
    }
    let description = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "write a function that merges two sorted lists".into());

    let pair = BackendPair::Shared(Arc::new(HttpBackend::new(config)));
    let mut session = new_session(ProblemDescription::new(description)?, SessionConfig::default())?;
    let mut user = SimulatedUser::new(HiddenSpec::default());
    run_to_completion(&mut session, pair.coder(), pair.communicator(), &mut user)?;

    for ex in &session.exchanges {
        println!("[{}] {}: {}", ex.question_ref(), ex.question.topic, ex.question.text);
    }
    if let Some(rev) = session.latest_revision() {
        println!("\n{}", rev.code);
    }
    println!("\nstatus: {}", session.status);
    Ok(())
}
