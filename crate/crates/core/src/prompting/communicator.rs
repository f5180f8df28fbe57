use crate::backend::ChatRole;
use crate::session::{CodeRevision, ProblemDescription};

use super::PromptText;

/// Opening instruction of every communicator prompt.
pub const COMMUNICATOR_INSTRUCTION: &str = "You are an expert in software engineering. \
You will be given the problem description and current code of a coding task. \
You will generate a list of clarifying questions that may result in refining the code.";

/// Output-format directive appended after the task sections. Must stay in
/// sync with the grammar accepted by [`super::parse_question_list`].
pub const FORMAT_DIRECTIVE: &str = "### Output Format\n\
Group the questions under topic headers. Write each topic name on its own line ending \
with a colon, then list the questions for that topic below it as numbered entries, \
one question per line.";

/// Builds the zero-shot communicator prompt.
///
/// Sections, in order: the instruction, `### Problem Description` with the
/// quoted description, `### Generated Code From Previous Iteration` (only when
/// code exists), and the output-format directive. Code is embedded verbatim.
pub fn build_communicator_prompt(desc: &ProblemDescription, prev_code: Option<&CodeRevision>) -> PromptText {
    let system = format!("{COMMUNICATOR_INSTRUCTION}\n\n");
    let mut user = format!("### Problem Description\n\"{}\"\n\n", desc.text());
    if let Some(rev) = prev_code {
        user.push_str("### Generated Code From Previous Iteration\n");
        user.push_str(&rev.code);
        if !rev.code.ends_with('\n') {
            user.push('\n');
        }
        user.push('\n');
    }
    user.push_str(FORMAT_DIRECTIVE);
    user.push('\n');
    PromptText::from_messages(vec![(ChatRole::System, system), (ChatRole::User, user)])
}
