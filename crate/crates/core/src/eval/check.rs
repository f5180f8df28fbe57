use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::task::{Check, CheckKind};

pub const DEFAULT_EXEC_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOptions {
    /// External commands only run when this is set.
    pub allow_exec: bool,
    pub exec_timeout: Duration,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            allow_exec: false,
            exec_timeout: DEFAULT_EXEC_TIMEOUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeCheckReport {
    pub passed: bool,
    pub checks_passed: usize,
    pub outcomes: Vec<CheckOutcome>,
}

/// Result of the raw check before `expect_pass` is applied; `Err` means the
/// check could not be evaluated and fails either way.
fn raw_check(code: &str, check: &Check, opts: &CheckOptions) -> Result<bool, String> {
    match check.kind {
        CheckKind::MustContainSubstring => Ok(code.contains(&check.payload)),
        CheckKind::MustMatchRegex => Regex::new(&check.payload)
            .map(|re| re.is_match(code))
            .map_err(|e| format!("invalid regex: {e}")),
        CheckKind::ExternalCommand => {
            if !opts.allow_exec {
                return Err("execution disabled".into());
            }
            run_command(code, &check.payload, opts.exec_timeout)
        }
    }
}

fn run_command(code: &str, template: &str, timeout: Duration) -> Result<bool, String> {
    let mut file = tempfile::Builder::new()
        .prefix("clarifier-check-")
        .tempfile()
        .map_err(|e| format!("cannot create code file: {e}"))?;
    file.write_all(code.as_bytes())
        .map_err(|e| format!("cannot write code file: {e}"))?;
    file.flush().map_err(|e| format!("cannot write code file: {e}"))?;
    let command = template.replace("{code_file}", &file.path().display().to_string());

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("cannot start command: {e}"))?;
    match child
        .wait_timeout(timeout)
        .map_err(|e| format!("cannot wait for command: {e}"))?
    {
        Some(status) if status.code() == Some(127) => Err("command not found".into()),
        Some(status) => Ok(status.success()),
        None => {
            let _ = child.kill();
            let _ = child.wait();
            Err(format!("timed out after {timeout:?}"))
        }
    }
}

/// Runs every check against `code`. The code passes when all checks do.
pub fn check_code(code: &str, checks: &[Check], opts: &CheckOptions) -> CodeCheckReport {
    let outcomes: Vec<CheckOutcome> = checks
        .iter()
        .map(|check| match raw_check(code, check, opts) {
            Ok(held) if held == check.expect_pass => CheckOutcome {
                passed: true,
                reason: None,
            },
            Ok(held) => CheckOutcome {
                passed: false,
                reason: Some(if held {
                    "check held but was expected to fail".into()
                } else {
                    "check did not hold".into()
                }),
            },
            Err(reason) => CheckOutcome {
                passed: false,
                reason: Some(reason),
            },
        })
        .collect();
    let checks_passed = outcomes.iter().filter(|o| o.passed).count();
    CodeCheckReport {
        passed: checks_passed == checks.len(),
        checks_passed,
        outcomes,
    }
}
