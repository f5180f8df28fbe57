//! Starts the HTTP API on the golden script and drives one session with
//! plain HTTP calls.
//!
//!     cargo run --example serve_offline

use std::sync::Arc;

use clarifier::backend::{scripted_from_file, BackendPair};
use clarifier::fixtures;
use clarifier::service::{ServiceConfig, ServiceHandle};
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let script = scripted_from_file(fixtures::golden_script_path())?;
    let config = ServiceConfig::new(BackendPair::Shared(Arc::new(script)));
    let server = ServiceHandle::start(config, "127.0.0.1:0".parse()?)?;
    let base = server.base_url();
    println!("serving on {base}");

    let created: Value = ureq::post(&format!("{base}/api/sessions"))
        .send_json(json!({ "description": fixtures::FIB_DESCRIPTION }))?
        .body_mut()
        .read_json()?;
    let id = created["session_id"].as_str().unwrap_or_default();
    for q in created["pending_questions"].as_array().into_iter().flatten() {
        let field = |k: &str| q[k].as_str().unwrap_or_default().to_string();
        println!("[{}] {}: {}", field("question_ref"), field("topic"), field("text"));
    }

    let body = json!({ "answers": [{ "question_ref": "q0.0", "text": fixtures::FIB_NEGATIVE_ANSWER }] });
    let after: Value = ureq::post(&format!("{base}/api/sessions/{id}/answers"))
        .send_json(body)?
        .body_mut()
        .read_json()?;
    println!("\nstatus: {}", after["status"].as_str().unwrap_or_default());
    println!(
        "{}",
        after["transcript"]["revisions"][1]["code"].as_str().unwrap_or_default()
    );
    Ok(())
}
