use std::net::SocketAddr;
use std::sync::{Arc, Barrier};
use std::time::Duration;

use clarifier::backend::{
    scripted_from_file, Backend, BackendPair, BackendRequest, BackendResponse, ScriptEntry, ScriptedBackend,
};
use clarifier::error::BackendError;
use clarifier::fixtures;
use clarifier::service::{ServiceConfig, ServiceHandle};
use clarifier::session::{load_transcript, SessionStatus};
use serde_json::{json, Value};

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

fn call(base: &str, method: &str, path: &str, body: Option<Value>) -> (u16, Value) {
    let url = format!("{base}{path}");
    let agent = agent();
    let mut resp = match (method, body) {
        ("GET", _) => agent.get(&url).call().unwrap(),
        (_, Some(b)) => agent.post(&url).send_json(b).unwrap(),
        (_, None) => agent.post(&url).send_empty().unwrap(),
    };
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

fn local() -> SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}

fn start(pair: BackendPair) -> ServiceHandle {
    ServiceHandle::start(ServiceConfig::new(pair), local()).unwrap()
}

fn golden() -> ServiceHandle {
    let script = scripted_from_file(fixtures::golden_script_path()).unwrap();
    start(BackendPair::Shared(Arc::new(script)))
}

fn create(base: &str) -> (String, Value) {
    let (status, body) = call(
        base,
        "POST",
        "/api/sessions",
        Some(json!({ "description": fixtures::FIB_DESCRIPTION })),
    );
    assert_eq!(status, 201, "{body}");
    (body["session_id"].as_str().unwrap().to_string(), body)
}

/// coder, communicator, coder, communicator, ... with one question per round.
fn multi_round() -> BackendPair {
    let coder = ScriptedBackend::new((0..3).map(|i| ScriptEntry::new(format!("```\nv{i}\n```"))).collect());
    let communicator = ScriptedBackend::new(
        (0..3)
            .map(|i| ScriptEntry::new(format!("Testing:\n1. Round {i} question?")))
            .collect(),
    );
    BackendPair::Split {
        coder: Arc::new(coder),
        communicator: Arc::new(communicator),
    }
}

#[test]
fn health_and_builtin_index() {
    let server = golden();
    let (status, body) = call(&server.base_url(), "GET", "/api/health", None);
    assert_eq!((status, body), (200, json!({"status": "ok"})));
    let (status, body) = call(&server.base_url(), "GET", "/", None);
    assert_eq!(status, 200);
    assert!(body.as_str().unwrap().contains("<html>"));
}

#[test]
fn static_dir_is_served_from_root() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>ui build</p>").unwrap();
    let mut config = ServiceConfig::new(multi_round());
    config.static_dir = Some(dir.path().to_path_buf());
    let server = ServiceHandle::start(config, local()).unwrap();
    let (status, body) = call(&server.base_url(), "GET", "/", None);
    assert_eq!((status, body.as_str()), (200, Some("<p>ui build</p>")));
    let (status, _) = call(&server.base_url(), "GET", "/api/health", None);
    assert_eq!(status, 200);
}

#[test]
fn create_runs_first_round_eagerly() {
    let server = golden();
    let (id, body) = create(&server.base_url());
    assert_eq!(body["status"], "active");
    assert_eq!(body["transcript"]["revisions"][0]["code"], fixtures::FIB_INITIAL_CODE);
    let pending = body["pending_questions"].as_array().unwrap();
    assert_eq!(pending.len(), 3);
    assert_eq!(pending[0]["topic"], "Input Validation");
    assert_eq!(pending[0]["text"], "Should input validation be part of the function?");

    let (status, snapshot) = call(&server.base_url(), "GET", &format!("/api/sessions/{id}"), None);
    assert_eq!(status, 200);
    assert_eq!(snapshot, body);
}

#[test]
fn create_rejects_bad_input() {
    let server = golden();
    let base = server.base_url();
    let (status, body) = call(&base, "POST", "/api/sessions", Some(json!({ "description": "  " })));
    assert_eq!(status, 400);
    assert_eq!(body["error"]["code"], "validation");
    let (status, _) = call(
        &base,
        "POST",
        "/api/sessions",
        Some(json!({ "description": "x", "config": { "max_iters": 2 } })),
    );
    assert_eq!(status, 400);
    let (status, _) = call(
        &base,
        "POST",
        "/api/sessions",
        Some(json!({ "description": "x", "config": { "max_iterations": 0 } })),
    );
    assert_eq!(status, 400);
}

#[test]
fn config_overrides_apply() {
    let server = golden();
    let req = json!({ "description": fixtures::FIB_DESCRIPTION, "config": { "communication_level": "over" } });
    let (status, body) = call(&server.base_url(), "POST", "/api/sessions", Some(req));
    assert_eq!(status, 201);
    assert_eq!(body["pending_questions"].as_array().unwrap().len(), 24);
    assert_eq!(body["transcript"]["config"]["communication_level"], "over");
    assert_eq!(body["transcript"]["config"]["max_iterations"], 3);
}

#[test]
fn exhausted_script_is_bad_gateway() {
    let server = start(BackendPair::Shared(Arc::new(ScriptedBackend::new(vec![]))));
    let (status, body) = call(
        &server.base_url(),
        "POST",
        "/api/sessions",
        Some(json!({ "description": "x" })),
    );
    assert_eq!(status, 502);
    assert_eq!(body["error"]["code"], "backend");
    assert!(body["error"]["message"].as_str().unwrap().contains("exhausted"));
}

#[test]
fn answering_refines_code_and_finishes() {
    let server = golden();
    let base = server.base_url();
    let (id, body) = create(&base);
    let top = body["pending_questions"][0]["question_ref"].as_str().unwrap();
    let answers = json!({ "answers": [{ "question_ref": top, "text": fixtures::FIB_NEGATIVE_ANSWER }] });
    let (status, body) = call(&base, "POST", &format!("/api/sessions/{id}/answers"), Some(answers));
    assert_eq!(status, 200, "{body}");
    assert_eq!(body["transcript"]["revisions"][1]["code"], fixtures::FIB_REFINED_CODE);
    assert!(body["transcript"]["revisions"][1]["code"]
        .as_str()
        .unwrap()
        .contains("n < 0"));
    assert_eq!(body["status"], "done_no_questions");
    assert_eq!(body["pending_questions"], json!([]));

    let exchanges = body["transcript"]["exchanges"].as_array().unwrap();
    assert_eq!(exchanges.len(), 3);
    assert_eq!(exchanges[0]["answer"]["text"], fixtures::FIB_NEGATIVE_ANSWER);
    assert!(exchanges[1]["answer"].is_null());

    let again = json!({ "answers": [{ "question_ref": top, "text": "again" }] });
    let (status, body) = call(&base, "POST", &format!("/api/sessions/{id}/answers"), Some(again));
    assert_eq!(status, 409);
    assert_eq!(body["error"]["code"], "not_active");
}

#[test]
fn answer_errors() {
    let server = start(multi_round());
    let base = server.base_url();
    let (status, _) = call(
        &base,
        "POST",
        "/api/sessions/nope/answers",
        Some(json!({ "answers": [] })),
    );
    assert_eq!(status, 404);

    let (id, _) = create(&base);
    let path = format!("/api/sessions/{id}/answers");
    let (status, body) = call(
        &base,
        "POST",
        &path,
        Some(json!({ "answers": [{ "question_ref": "q9.9", "text": "x" }] })),
    );
    assert_eq!(status, 422);
    assert_eq!(body["error"]["code"], "unknown_question");

    let (status, _) = call(
        &base,
        "POST",
        &path,
        Some(json!({ "answers": [{ "question_ref": "q0.0", "text": "yes" }] })),
    );
    assert_eq!(status, 200);
    // q0.0 was answered in the previous round and is no longer pending.
    let (status, _) = call(
        &base,
        "POST",
        &path,
        Some(json!({ "answers": [{ "question_ref": "q0.0", "text": "yes" }] })),
    );
    assert_eq!(status, 422);
    let (status, _) = call(
        &base,
        "POST",
        &path,
        Some(json!({ "answers": [{ "question_ref": "q1.0" }] })),
    );
    assert_eq!(status, 422, "empty text without skip");
}

#[test]
fn skipping_everything_still_refines() {
    let server = start(multi_round());
    let base = server.base_url();
    let (id, _) = create(&base);
    let skip = json!({ "answers": [{ "question_ref": "q0.0", "skip": true }] });
    let (status, body) = call(&base, "POST", &format!("/api/sessions/{id}/answers"), Some(skip));
    assert_eq!(status, 200);
    let revisions = body["transcript"]["revisions"].as_array().unwrap();
    assert_eq!(revisions.len(), 2);
    assert!(!revisions[1]["coder_prompt"]
        .as_str()
        .unwrap()
        .contains("### Clarifications"));
    assert_eq!(body["transcript"]["exchanges"][0]["answer"]["source"], "skipped");
    assert_eq!(body["pending_questions"][0]["question_ref"], "q1.0");
}

#[test]
fn stop_is_idempotent() {
    let server = golden();
    let base = server.base_url();
    let (status, _) = call(&base, "POST", "/api/sessions/unknown/stop", None);
    assert_eq!(status, 404);

    let (id, _) = create(&base);
    let (status, first) = call(&base, "POST", &format!("/api/sessions/{id}/stop"), None);
    assert_eq!(status, 200);
    assert_eq!(first["status"], "done_user_stop");
    assert_eq!(first["pending_questions"], json!([]));
    let (status, second) = call(&base, "POST", &format!("/api/sessions/{id}/stop"), None);
    assert_eq!(status, 200);
    assert_eq!(first, second);
    let (_, snapshot) = call(&base, "GET", &format!("/api/sessions/{id}"), None);
    assert_eq!(snapshot, first);
}

#[test]
fn transcripts_are_written_through() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ServiceConfig::new(BackendPair::Shared(Arc::new(
        scripted_from_file(fixtures::golden_script_path()).unwrap(),
    )));
    config.out_dir = Some(dir.path().to_path_buf());
    let server = ServiceHandle::start(config, local()).unwrap();
    let (id, _) = create(&server.base_url());
    call(&server.base_url(), "POST", &format!("/api/sessions/{id}/stop"), None);
    let bytes = std::fs::read(dir.path().join(format!("{id}.json"))).unwrap();
    let transcript = load_transcript(&bytes).unwrap();
    assert_eq!(transcript.status, SessionStatus::DoneUserStop);
    assert_eq!(transcript.exchanges.len(), 3);
}

/// Delays every call after the first `fast` ones.
struct Slow {
    inner: ScriptedBackend,
    fast: usize,
    calls: std::sync::atomic::AtomicUsize,
}

impl Backend for Slow {
    fn complete(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        if self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst) >= self.fast {
            std::thread::sleep(Duration::from_millis(400));
        }
        self.inner.complete(request)
    }

    fn fresh(&self) -> Arc<dyn Backend> {
        Arc::new(Slow {
            inner: ScriptedBackend::new(self.inner.entries().to_vec()),
            fast: self.fast,
            calls: Default::default(),
        })
    }
}

#[test]
fn concurrent_mutation_gets_conflict() {
    let golden = scripted_from_file(fixtures::golden_script_path()).unwrap();
    let slow = Slow {
        inner: golden,
        fast: 2,
        calls: Default::default(),
    };
    let server = start(BackendPair::Shared(Arc::new(slow)));
    let base = server.base_url();
    let (id, _) = create(&base);

    let barrier = Arc::new(Barrier::new(2));
    let handles: Vec<_> = (0..2)
        .map(|_| {
            let (base, id, barrier) = (base.clone(), id.clone(), barrier.clone());
            std::thread::spawn(move || {
                barrier.wait();
                let body = json!({ "answers": [{ "question_ref": "q0.0", "text": fixtures::FIB_NEGATIVE_ANSWER }] });
                call(&base, "POST", &format!("/api/sessions/{id}/answers"), Some(body))
            })
        })
        .collect();
    let mut statuses: Vec<u16> = handles.into_iter().map(|h| h.join().unwrap().0).collect();
    statuses.sort();
    assert_eq!(statuses, vec![200, 409]);

    let (_, snapshot) = call(&base, "GET", &format!("/api/sessions/{id}"), None);
    assert_eq!(snapshot["transcript"]["revisions"].as_array().unwrap().len(), 2);
    assert_eq!(snapshot["transcript"]["exchanges"].as_array().unwrap().len(), 3);
}

#[test]
fn reads_do_not_wait_for_mutations() {
    let golden = scripted_from_file(fixtures::golden_script_path()).unwrap();
    let slow = Slow {
        inner: golden,
        fast: 2,
        calls: Default::default(),
    };
    let server = start(BackendPair::Shared(Arc::new(slow)));
    let base = server.base_url();
    let (id, created) = create(&base);

    let writer = {
        let (base, id) = (base.clone(), id.clone());
        std::thread::spawn(move || {
            let body = json!({ "answers": [{ "question_ref": "q0.0", "text": "treat negative n as an error" }] });
            call(&base, "POST", &format!("/api/sessions/{id}/answers"), Some(body))
        })
    };
    std::thread::sleep(Duration::from_millis(100));
    let started = std::time::Instant::now();
    let (status, snapshot) = call(&base, "GET", &format!("/api/sessions/{id}"), None);
    assert_eq!(status, 200);
    assert!(started.elapsed() < Duration::from_millis(300));
    assert_eq!(snapshot, created);
    assert_eq!(writer.join().unwrap().0, 200);
}
