//! Fibonacci walkthrough fixtures shipped with the crate.
//!
//! The golden script replays one full clarification session: the initial
//! code, a fifteen-topic question list, the refined code that rejects
//! negative input, and a final reply with no further questions.

use std::path::PathBuf;

pub const FIB_DESCRIPTION: &str = "write a function to return n-th Fibonacci number. n is an int";

/// Initial coder output for the Fibonacci task.
pub const FIB_INITIAL_CODE: &str = include_str!("../fixtures/fib_initial.py");

/// Refined code after the negative-input clarification.
pub const FIB_REFINED_CODE: &str = include_str!("../fixtures/fib_refined.py");

/// The fifteen-topic question list in the canonical grammar.
pub const TAXONOMY_QUESTIONS: &str = include_str!("../fixtures/taxonomy_questions.txt");

/// Golden response script (coder and communicator interleaved).
pub const GOLDEN_SCRIPT: &str = include_str!("../fixtures/golden.fib.json");

/// The answer a user gives to the top question in the walkthrough.
pub const FIB_NEGATIVE_ANSWER: &str = "treat negative n as an error";

/// Directory holding the shipped fixtures.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn golden_script_path() -> PathBuf {
    fixtures_dir().join("golden.fib.json")
}

/// The eight-task desk suite.
pub fn desk_suite_dir() -> PathBuf {
    fixtures_dir().join("desk")
}
