use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::backend::{scripted_from_file, BackendPair};
use crate::config::SessionConfig;
use crate::error::{EvalError, ScriptError};
use crate::oracle::SimulatedUser;
use crate::session::{
    new_session, run_iteration, run_to_completion, ScriptedAnswers, SessionStatus, SessionTranscript,
};
use crate::topic::QuestionTopic;

use super::check::{check_code, CheckOptions};
use super::task::EvalTask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    WithClarification,
    WithoutClarification,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::WithClarification => "with_clarification",
            Arm::WithoutClarification => "without_clarification",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one arm of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task_id: String,
    pub arm: Arm,
    pub passed: bool,
    pub checks_passed: usize,
    pub checks_total: usize,
    pub questions_asked: usize,
    pub topics_hit: BTreeSet<QuestionTopic>,
    pub reference_topics: BTreeSet<QuestionTopic>,
    /// Relative to the run's output directory.
    pub transcript_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TaskResult {
    fn errored(task: &EvalTask, arm: Arm, error: String) -> Self {
        TaskResult {
            task_id: task.id.clone(),
            arm,
            passed: false,
            checks_passed: 0,
            checks_total: task.checks.len(),
            questions_asked: 0,
            topics_hit: BTreeSet::new(),
            reference_topics: task.reference_topics.clone(),
            transcript_path: String::new(),
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Transcripts go to `<out_dir>/transcripts/`.
    pub out_dir: PathBuf,
    pub check: CheckOptions,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            out_dir: out_dir.into(),
            check: CheckOptions::default(),
        }
    }
}

fn finish_arm(
    task: &EvalTask,
    arm: Arm,
    mut session: SessionTranscript,
    outcome: Result<(), String>,
    opts: &RunOptions,
) -> TaskResult {
    let mut error = outcome.err();
    if error.is_some() {
        session.status = SessionStatus::Failed;
    }
    let relative = format!("transcripts/{}.{}.json", task.id, arm);
    if let Err(e) = session.write_to(&opts.out_dir.join(&relative)) {
        error.get_or_insert_with(|| e.to_string());
    }

    let report = session
        .latest_revision()
        .filter(|_| error.is_none())
        .map(|rev| check_code(&rev.code, &task.checks, &opts.check));
    TaskResult {
        task_id: task.id.clone(),
        arm,
        passed: report.as_ref().is_some_and(|r| r.passed),
        checks_passed: report.as_ref().map_or(0, |r| r.checks_passed),
        checks_total: task.checks.len(),
        questions_asked: session.questions_asked(),
        topics_hit: session.exchanges.iter().map(|ex| ex.question.topic.clone()).collect(),
        reference_topics: task.reference_topics.clone(),
        transcript_path: relative,
        error,
    }
}

/// Runs both arms of a task.
///
/// The clarification arm runs the full loop against the simulated user. The
/// baseline arm makes a single coder call and never sees the communicator.
/// Each arm gets fresh backend instances; a failure in one arm does not stop
/// the other.
pub fn run_task(
    task: &EvalTask,
    config: &SessionConfig,
    backends: &BackendPair,
    opts: &RunOptions,
) -> (TaskResult, TaskResult) {
    let with = {
        let pair = backends.fresh();
        match new_session(task.blurred_description.clone(), config.clone()) {
            Ok(mut session) => {
                let mut user = SimulatedUser::new(task.hidden_spec.clone());
                let outcome = run_to_completion(&mut session, pair.coder(), pair.communicator(), &mut user)
                    .map_err(|e| e.to_string());
                finish_arm(task, Arm::WithClarification, session, outcome, opts)
            }
            Err(e) => TaskResult::errored(task, Arm::WithClarification, e.to_string()),
        }
    };

    let without = {
        let pair = backends.fresh();
        let single = SessionConfig {
            max_iterations: 1,
            ..config.clone()
        };
        match new_session(task.blurred_description.clone(), single) {
            Ok(mut session) => {
                let outcome = run_iteration(
                    &mut session,
                    pair.coder(),
                    pair.coder(),
                    &mut ScriptedAnswers::default(),
                )
                .map_err(|e| e.to_string());
                finish_arm(task, Arm::WithoutClarification, session, outcome, opts)
            }
            Err(e) => TaskResult::errored(task, Arm::WithoutClarification, e.to_string()),
        }
    };

    for r in [&with, &without] {
        match &r.error {
            Some(e) => warn!(task = %task.id, arm = %r.arm, error = %e, "arm failed"),
            None => debug!(task = %task.id, arm = %r.arm, passed = r.passed, "arm finished"),
        }
    }
    (with, without)
}

/// Runs every task on `jobs` worker threads. Results come back in task
/// order, clarification arm first.
pub fn run_suite<F>(
    tasks: &[EvalTask],
    config: &SessionConfig,
    backends_for: F,
    opts: &RunOptions,
    jobs: usize,
) -> Vec<TaskResult>
where
    F: Fn(&EvalTask) -> Result<BackendPair, String> + Sync,
{
    use rayon::prelude::*;

    let run_one = |task: &EvalTask| match backends_for(task) {
        Ok(pair) => {
            let (a, b) = run_task(task, config, &pair, opts);
            vec![a, b]
        }
        Err(e) => vec![
            TaskResult::errored(task, Arm::WithClarification, e.clone()),
            TaskResult::errored(task, Arm::WithoutClarification, e),
        ],
    };

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build();
    match pool {
        Ok(pool) => pool.install(|| tasks.par_iter().flat_map_iter(run_one).collect()),
        Err(_) => tasks.iter().flat_map(run_one).collect(),
    }
}

/// Scripted backends for a task from `scripts_dir`: either one interleaved
/// `<id>.json`, or `<id>.coder.json` plus `<id>.communicator.json`.
pub fn scripted_pair(scripts_dir: &Path, task_id: &str) -> Result<BackendPair, ScriptError> {
    let shared = scripts_dir.join(format!("{task_id}.json"));
    if shared.is_file() {
        return Ok(BackendPair::Shared(std::sync::Arc::new(scripted_from_file(shared)?)));
    }
    let coder = scripted_from_file(scripts_dir.join(format!("{task_id}.coder.json")))?;
    let communicator = scripted_from_file(scripts_dir.join(format!("{task_id}.communicator.json")))?;
    Ok(BackendPair::Split {
        coder: std::sync::Arc::new(coder),
        communicator: std::sync::Arc::new(communicator),
    })
}

/// Reads back the transcript a result points to.
pub fn load_result_transcript(out_dir: &Path, result: &TaskResult) -> Result<SessionTranscript, EvalError> {
    Ok(SessionTranscript::read_from(&out_dir.join(&result.transcript_path))?)
}
