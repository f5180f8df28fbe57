use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

use super::run::{Arm, TaskResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPair {
    pub task_id: String,
    pub with_clarification: TaskResult,
    pub without_clarification: TaskResult,
}

impl TaskPair {
    /// Share of reference topics the clarification arm asked about. A task
    /// without reference topics counts as fully covered.
    pub fn topic_recall(&self) -> f64 {
        let reference = &self.with_clarification.reference_topics;
        if reference.is_empty() {
            return 1.0;
        }
        let hit = reference.intersection(&self.with_clarification.topics_hit).count();
        hit as f64 / reference.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tasks: Vec<TaskPair>,
    pub with_pass_rate: f64,
    pub without_pass_rate: f64,
    /// Pass rate with clarification minus pass rate without, in [-1, 1].
    pub clarification_gain: f64,
    /// Mean per-task topic recall, in [0, 1].
    pub topic_recall: f64,
    /// Arms that ended in an error.
    pub errored_arms: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization is infallible");
        s.push('\n');
        s
    }

    /// Fixed-width summary table.
    pub fn render_table(&self) -> String {
        let width = self.tasks.iter().map(|t| t.task_id.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>9}  {:>6}  {:>9}  {:>6}",
            "task", "with", "questions", "recall", "without", "error"
        );
        for t in &self.tasks {
            let mark = |r: &TaskResult| if r.passed { "pass" } else { "fail" };
            let err = if t.with_clarification.error.is_some() || t.without_clarification.error.is_some() {
                "yes"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>9}  {:>6.2}  {:>9}  {:>6}",
                t.task_id,
                mark(&t.with_clarification),
                t.with_clarification.questions_asked,
                t.topic_recall(),
                mark(&t.without_clarification),
                err
            );
        }
        let _ = writeln!(
            out,
            "\npass rate with clarification: {:.3}\npass rate without clarification: {:.3}\nclarification gain: {:+.3}\ntopic recall: {:.3}",
            self.with_pass_rate, self.without_pass_rate, self.clarification_gain, self.topic_recall
        );
        out
    }
}

/// Pairs results per task and computes the summary metrics. Tasks appear in
/// id order. An empty result set yields all-zero metrics.
pub fn aggregate(results: &[TaskResult]) -> Result<EvalReport, EvalError> {
    let mut by_task: BTreeMap<&str, (Option<&TaskResult>, Option<&TaskResult>)> = BTreeMap::new();
    for r in results {
        let slot = by_task.entry(&r.task_id).or_default();
        let arm = match r.arm {
            Arm::WithClarification => &mut slot.0,
            Arm::WithoutClarification => &mut slot.1,
        };
        if arm.replace(r).is_some() {
            return Err(EvalError::Unpaired(r.task_id.clone()));
        }
    }
    let tasks = by_task
        .into_iter()
        .map(|(id, pair)| match pair {
            (Some(with), Some(without)) => Ok(TaskPair {
                task_id: id.to_string(),
                with_clarification: with.clone(),
                without_clarification: without.clone(),
            }),
            _ => Err(EvalError::Unpaired(id.to_string())),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let n = tasks.len();
    let rate = |f: fn(&TaskPair) -> bool| {
        if n == 0 {
            0.0
        } else {
            tasks.iter().filter(|t| f(t)).count() as f64 / n as f64
        }
    };
    let with_pass_rate = rate(|t| t.with_clarification.passed);
    let without_pass_rate = rate(|t| t.without_clarification.passed);
    let topic_recall = if n == 0 {
        0.0
    } else {
        tasks.iter().map(TaskPair::topic_recall).sum::<f64>() / n as f64
    };
    let errored_arms = results.iter().filter(|r| r.error.is_some()).count();
    Ok(EvalReport {
        tasks,
        with_pass_rate,
        without_pass_rate,
        clarification_gain: with_pass_rate - without_pass_rate,
        topic_recall,
        errored_arms,
    })
}
