//! Two-arm benchmark over blurred task descriptions.
//!
//! Each task hides some requirement from its description. The clarification
//! arm may recover it by asking the simulated user; the baseline arm codes
//! straight from the blurred text. Clarification gain is the pass-rate
//! difference between the two.

mod check;
mod report;
mod run;
mod task;

pub use check::{check_code, CheckOptions, CheckOutcome, CodeCheckReport, DEFAULT_EXEC_TIMEOUT};
pub use report::{aggregate, EvalReport, TaskPair};
pub use run::{load_result_transcript, run_suite, run_task, scripted_pair, Arm, RunOptions, TaskResult};
pub use task::{load_suite, load_task, Check, CheckKind, EvalTask};
