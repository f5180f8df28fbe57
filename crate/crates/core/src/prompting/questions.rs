//! Topic-grouped question lists.
//!
//! Grammar (one item per line, blank lines ignored):
//!
//! ```text
//! Input Validation:
//! 1. Should input validation be part of the function?
//! 2. If so, what should be done if n is not an integer?
//!
//! Error Handling:
//! - How should errors be handled?
//! ```
//!
//! * A **header** is a line whose text, after stripping an optional list
//!   marker and `*`/`_` emphasis, ends with `:` and contains no `?`; or a
//!   markdown heading (`#`…); or a fully bold line without `?`. The label
//!   before the colon is classified with [`classify_topic`].
//! * An **entry** starts with a list marker (`1.`, `1)`, `-`, `*`, `+`, `•`).
//!   Entry text never ends with `:`. An entry of the form `Label: text` whose
//!   label is a canonical topic takes that topic inline.
//! * A line without a marker that ends with `?` is also an entry.
//! * An indented line right after an entry continues that entry.
//! * Anything else is ignored. Entries before the first header are
//!   `Other("uncategorized")`.

use crate::topic::{classify_topic, QuestionTopic};

use super::ClarifyingQuestion;

/// Splits off a leading list marker. Returns the remainder when one was found.
fn strip_marker(line: &str) -> Option<&str> {
    for bullet in ["- ", "* ", "+ ", "• "] {
        if let Some(rest) = line.strip_prefix(bullet) {
            return Some(rest.trim_start());
        }
    }
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 && digits <= 3 {
        let rest = &line[digits..];
        for sep in [". ", ") "] {
            if let Some(rest) = rest.strip_prefix(sep) {
                return Some(rest.trim_start());
            }
        }
    }
    None
}

fn strip_emphasis(s: &str) -> &str {
    s.trim().trim_matches(|c| c == '*' || c == '_').trim()
}

fn header_label(body: &str) -> Option<&str> {
    if body.contains('?') {
        return None;
    }
    let cleaned = strip_emphasis(body);
    let label = cleaned.strip_suffix(':')?;
    let label = strip_emphasis(label);
    (!label.is_empty()).then_some(label)
}

fn is_bold_line(body: &str) -> bool {
    let t = body.trim();
    t.len() > 4 && t.starts_with("**") && t.ends_with("**")
}

/// `Input Validation: Should ...?` with a canonical label.
fn inline_topic(text: &str) -> Option<(QuestionTopic, &str)> {
    let (label, rest) = text.split_once(':')?;
    let rest = rest.trim();
    if rest.is_empty() || label.contains('?') {
        return None;
    }
    let topic = classify_topic(strip_emphasis(label));
    topic.is_canonical().then_some((topic, strip_emphasis_prefix(rest)))
}

/// Drops a bold marker left dangling after an inline label such as `**Testing:** text`.
fn strip_emphasis_prefix(s: &str) -> &str {
    s.trim_start_matches(['*', '_']).trim_start()
}

/// Parses communicator output into questions, in source order.
///
/// Never fails: input with no recognizable entries yields an empty list.
pub fn parse_question_list(raw: &str) -> Vec<ClarifyingQuestion> {
    let mut out: Vec<ClarifyingQuestion> = Vec::new();
    let mut topic = QuestionTopic::uncategorized();
    let mut last_was_entry = false;

    for line in raw.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            last_was_entry = false;
            continue;
        }

        if trimmed.starts_with('#') {
            let label = strip_emphasis(trimmed.trim_start_matches('#'));
            let label = strip_emphasis(label.strip_suffix(':').unwrap_or(label));
            if !label.is_empty() && !label.contains('?') {
                topic = classify_topic(label);
            }
            last_was_entry = false;
            continue;
        }

        let marker_body = strip_marker(trimmed);
        let body = marker_body.unwrap_or(trimmed);

        if let Some(label) = header_label(body) {
            topic = classify_topic(label);
            last_was_entry = false;
            continue;
        }
        if marker_body.is_none() && is_bold_line(body) && !body.contains('?') {
            topic = classify_topic(strip_emphasis(body));
            last_was_entry = false;
            continue;
        }

        if marker_body.is_none() {
            let indented = line.starts_with(|c: char| c.is_whitespace());
            match out.last_mut() {
                Some(prev) if indented && last_was_entry && !prev.text.ends_with('?') => {
                    prev.text.push(' ');
                    prev.text.push_str(body);
                    continue;
                }
                _ if !body.ends_with('?') => continue,
                _ => {}
            }
        }

        let (entry_topic, text) = match inline_topic(body) {
            Some((t, rest)) => (t, rest),
            None => (topic.clone(), body),
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let order = out.len() as u32;
        out.push(ClarifyingQuestion::new(entry_topic, text, order));
        last_was_entry = true;
    }
    out
}

/// Renders questions in the canonical grammar. Consecutive questions with
/// the same topic share a header; numbering restarts under each header.
pub fn format_question_list(questions: &[ClarifyingQuestion]) -> String {
    let mut out = String::new();
    let mut current: Option<&QuestionTopic> = None;
    let mut number = 0;
    for q in questions {
        if current != Some(&q.topic) {
            if current.is_some() {
                out.push('\n');
            }
            out.push_str(q.topic.label());
            out.push_str(":\n");
            current = Some(&q.topic);
            number = 0;
        }
        number += 1;
        out.push_str(&format!("{number}. {}\n", q.text));
    }
    out
}
