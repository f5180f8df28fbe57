use crate::backend::ChatRole;
use crate::error::SessionError;
use crate::session::{CodeRevision, ProblemDescription, QAExchange};

use super::PromptText;

pub const CODER_INSTRUCTION: &str = "You are an expert programmer. Write code that solves the problem described below.";

/// Closing line of every coder prompt.
pub const CODER_OUTPUT_DIRECTIVE: &str = "Reply with only the final code in a single fenced code block.";

/// Builds the coder prompt for an initial generation or a refinement.
///
/// Answered exchanges appear as `Q: … / A: …` blocks in ask order. Skipped
/// or unanswered exchanges are left out.
pub fn build_coder_prompt(
    desc: &ProblemDescription,
    qa: &[QAExchange],
    prev_code: Option<&CodeRevision>,
) -> PromptText {
    let system = format!("{CODER_INSTRUCTION}\n\n");
    let mut user = format!("### Problem Description\n\"{}\"\n\n", desc.text());

    if let Some(rev) = prev_code {
        user.push_str("### Current Code\n");
        user.push_str(&rev.code);
        if !rev.code.ends_with('\n') {
            user.push('\n');
        }
        user.push('\n');
    }

    let answered: Vec<_> = qa
        .iter()
        .filter_map(|ex| match &ex.answer {
            Some(a) if !a.is_skipped() => Some((&ex.question.text, &a.text)),
            _ => None,
        })
        .collect();
    if !answered.is_empty() {
        user.push_str("### Clarifications\n");
        for (question, answer) in answered {
            user.push_str(&format!("Q: {question}\nA: {answer}\n\n"));
        }
    }

    if prev_code.is_some() {
        user.push_str("Refine the current code so that it satisfies the clarifications. ");
    }
    user.push_str(CODER_OUTPUT_DIRECTIVE);
    user.push('\n');
    PromptText::from_messages(vec![(ChatRole::System, system), (ChatRole::User, user)])
}

/// Pulls the code out of a coder reply.
///
/// Returns the body of the first fenced block (```` ``` ```` or `~~~`) and
/// its info tag. Without a fence the whole reply, trimmed, is the code. An
/// unterminated fence runs to the end of the reply.
pub fn extract_code(coder_output: &str) -> Result<(String, Option<String>), SessionError> {
    let mut lines = coder_output.lines();
    while let Some(line) = lines.next() {
        let trimmed = line.trim_start();
        let fence = if trimmed.starts_with("```") {
            "```"
        } else if trimmed.starts_with("~~~") {
            "~~~"
        } else {
            continue;
        };
        let tag = trimmed.trim_start_matches(fence.chars().next().unwrap_or('`')).trim();
        let hint = tag.split_whitespace().next().map(str::to_string);
        let body: Vec<&str> = lines
            .by_ref()
            .take_while(|l| !l.trim_start().starts_with(fence))
            .collect();
        let code = body.join("\n");
        if code.trim().is_empty() {
            return Err(SessionError::NoCode);
        }
        return Ok((code, hint));
    }

    let code = coder_output.trim();
    if code.is_empty() {
        Err(SessionError::NoCode)
    } else {
        Ok((code.to_string(), None))
    }
}
