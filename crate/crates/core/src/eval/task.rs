use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::EvalError;
use crate::oracle::HiddenSpec;
use crate::session::ProblemDescription;
use crate::topic::QuestionTopic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    MustContainSubstring,
    MustMatchRegex,
    /// Shell command with `{code_file}` replaced by a path holding the code.
    ExternalCommand,
}

/// One acceptance check on generated code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub kind: CheckKind,
    pub payload: String,
    /// Whether the raw check is expected to hold. `false` inverts it.
    #[serde(default = "yes")]
    pub expect_pass: bool,
}

fn yes() -> bool {
    true
}

impl Check {
    pub fn new(kind: CheckKind, payload: impl Into<String>) -> Self {
        Check {
            kind,
            payload: payload.into(),
            expect_pass: true,
        }
    }
}

/// A benchmark task: a description with something left out, the hidden
/// facts, and the checks that only pass if those facts made it into the code.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTask {
    pub id: String,
    pub blurred_description: ProblemDescription,
    pub hidden_spec: HiddenSpec,
    pub checks: Vec<Check>,
    pub reference_topics: BTreeSet<QuestionTopic>,
    pub source_path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    id: String,
    description: String,
    #[serde(default)]
    hidden_spec: HiddenSpec,
    #[serde(default)]
    checks: Vec<Check>,
    #[serde(default)]
    reference_topics: BTreeSet<QuestionTopic>,
}

impl EvalTask {
    fn from_doc(doc: TaskDoc, path: &Path) -> Result<Self, EvalError> {
        let invalid = |message: String| EvalError::InvalidTask {
            id: doc.id.clone(),
            path: path.to_path_buf(),
            message,
        };
        if doc.id.trim().is_empty() {
            return Err(invalid("id must not be empty".into()));
        }
        let description = ProblemDescription::new(doc.description.clone())
            .map_err(|e| invalid(e.to_string()))?
            .with_source(doc.id.clone());
        if doc.checks.is_empty() {
            return Err(invalid("task needs at least one check".into()));
        }
        for (i, check) in doc.checks.iter().enumerate() {
            if check.kind == CheckKind::MustMatchRegex {
                Regex::new(&check.payload)
                    .map_err(|e| invalid(format!("check {i}: invalid regex {:?}: {e}", check.payload)))?;
            }
        }
        doc.hidden_spec.validate().map_err(invalid)?;
        Ok(EvalTask {
            id: doc.id.clone(),
            blurred_description: description,
            hidden_spec: doc.hidden_spec,
            checks: doc.checks,
            reference_topics: doc.reference_topics,
            source_path: Some(path.to_path_buf()),
        })
    }

    /// Serializes the task in the task-file format.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "id": self.id,
            "description": self.blurred_description.text(),
            "hidden_spec": self.hidden_spec,
            "checks": self.checks,
            "reference_topics": self.reference_topics,
        })
    }
}

/// Parses one task file.
pub fn load_task(path: impl AsRef<Path>) -> Result<EvalTask, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: TaskDoc = serde_json::from_str(&text).map_err(|e| EvalError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    EvalTask::from_doc(doc, path)
}

/// Loads every `*.json` file directly inside `dir`, sorted by task id.
///
/// An empty directory is a valid, empty suite.
pub fn load_suite(dir: impl AsRef<Path>) -> Result<Vec<EvalTask>, EvalError> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|source| EvalError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| EvalError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();

    let mut seen: HashMap<String, PathBuf> = HashMap::new();
    let mut tasks = Vec::with_capacity(paths.len());
    for path in paths {
        let task = load_task(&path)?;
        if let Some(first) = seen.get(&task.id) {
            return Err(EvalError::DuplicateId {
                id: task.id,
                first: first.clone(),
                second: path,
            });
        }
        seen.insert(task.id.clone(), path);
        tasks.push(task);
    }
    if tasks.is_empty() {
        warn!(dir = %dir.display(), "evaluation suite is empty");
    }
    tasks.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(tasks)
}
