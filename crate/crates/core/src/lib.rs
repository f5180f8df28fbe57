//! Code generation with clarifying questions.
//!
//! A coder model writes code for a problem description, a communicator model
//! reviews the description and the code and asks topic-tagged clarifying
//! questions, a user (human or simulated) answers, and the coder refines its
//! code with the answers. The loop repeats until the iteration budget is
//! spent, the communicator has nothing left to ask, or the user stops.
//!
//! * [`session`] drives the loop and persists transcripts.
//! * [`prompting`] builds prompts, parses question lists and ranks questions.
//! * [`backend`] is the chat-completion seam (scripted or HTTP).
//! * [`oracle`] answers questions from a hidden spec.
//! * [`eval`] runs blurred-description tasks with and without clarification.
//! * [`service`] exposes sessions over HTTP; [`cli`] is the command line.

pub mod backend;
pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod oracle;
pub mod prompting;
pub mod service;
pub mod session;
pub mod topic;

pub use config::{CommunicationLevel, SessionConfig, TopicWeights};
pub use topic::{classify_topic, QuestionTopic};
