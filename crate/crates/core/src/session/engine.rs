use serde::{Deserialize, Serialize};

use crate::backend::{Backend, BackendRequest, FinishReason};
use crate::config::SessionConfig;
use crate::error::{BackendError, Role, SessionError};
use crate::prompting::{
    build_coder_prompt, build_communicator_prompt, extract_code, parse_question_list, rank_and_select, Answer,
    AnswerOrigin, ClarifyingQuestion, PromptText, QuestionRef,
};

use super::{now, CodeRevision, ProblemDescription, QAExchange, SessionStatus, SessionTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    MaxIterations,
    NoQuestions,
    UserStop,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerminationDecision {
    pub stop: bool,
    pub reason: TerminationReason,
}

impl TerminationDecision {
    const CONTINUE: TerminationDecision = TerminationDecision {
        stop: false,
        reason: TerminationReason::None,
    };

    fn stop(reason: TerminationReason) -> Self {
        TerminationDecision { stop: true, reason }
    }
}

/// A selected question waiting for an answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingQuestion {
    pub question_ref: QuestionRef,
    pub question: ClarifyingQuestion,
}

/// What the user said in reply to one round of questions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundReply {
    pub answers: Vec<Answer>,
    /// End the session after recording `answers`.
    pub stop: bool,
}

/// Supplies answers to the questions of one round.
pub trait AnswerSource {
    fn answer_round(&mut self, pending: &[PendingQuestion]) -> RoundReply;
}

/// Replays canned replies using the interactive conventions: an empty
/// string skips the question, `/stop` ends the session. Once the replies
/// run out every further question is skipped.
#[derive(Debug, Clone, Default)]
pub struct ScriptedAnswers {
    replies: std::collections::VecDeque<String>,
}

impl ScriptedAnswers {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedAnswers {
            replies: replies.into_iter().map(Into::into).collect(),
        }
    }
}

impl AnswerSource for ScriptedAnswers {
    fn answer_round(&mut self, pending: &[PendingQuestion]) -> RoundReply {
        let mut reply = RoundReply::default();
        for p in pending {
            let text = self.replies.pop_front().unwrap_or_default();
            let text = text.trim();
            if text == "/stop" {
                reply.stop = true;
                break;
            }
            let answer = if text.is_empty() {
                Answer::skipped(p.question_ref.clone())
            } else {
                Answer {
                    question_ref: p.question_ref.clone(),
                    text: text.to_string(),
                    source: AnswerOrigin::Human,
                }
            };
            reply.answers.push(answer);
        }
        reply
    }
}

/// Starts an empty, active session.
pub fn new_session(desc: ProblemDescription, config: SessionConfig) -> Result<SessionTranscript, SessionError> {
    desc.validate()?;
    config.validate()?;
    let created = now();
    Ok(SessionTranscript {
        description: desc,
        revisions: Vec::new(),
        exchanges: Vec::new(),
        status: SessionStatus::Active,
        config_snapshot: config,
        created_at: created,
        updated_at: created,
    })
}

/// Decides whether the loop ends after the latest revision.
///
/// The iteration budget is checked before the empty-question rule.
pub fn should_terminate(
    session: &SessionTranscript,
    config: &SessionConfig,
    selected_question_count: usize,
) -> TerminationDecision {
    if session.revisions.len() >= config.max_iterations as usize {
        TerminationDecision::stop(TerminationReason::MaxIterations)
    } else if selected_question_count == 0 && config.stop_when_no_questions {
        TerminationDecision::stop(TerminationReason::NoQuestions)
    } else {
        TerminationDecision::CONTINUE
    }
}

fn status_for(reason: TerminationReason) -> SessionStatus {
    match reason {
        TerminationReason::MaxIterations => SessionStatus::DoneMaxIterations,
        TerminationReason::NoQuestions => SessionStatus::DoneNoQuestions,
        TerminationReason::UserStop => SessionStatus::DoneUserStop,
        TerminationReason::None => SessionStatus::Active,
    }
}

fn call(backend: &dyn Backend, role: Role, prompt: &PromptText) -> Result<String, SessionError> {
    let request = BackendRequest::from_prompt(prompt, backend.request_params());
    let response = backend
        .complete(&request)
        .map_err(|source| SessionError::Backend { role, source })?;
    if response.finish_reason == FinishReason::Error {
        return Err(SessionError::Backend {
            role,
            source: BackendError::Malformed("backend reported finish_reason=error".into()),
        });
    }
    Ok(response.content)
}

/// Runs the machine half of an iteration: one coder call, then (unless the
/// iteration budget is spent) one communicator call whose questions are
/// ranked and returned as pending.
///
/// Nothing is recorded unless every call succeeds. When the returned list
/// is empty the session has already reached a terminal status.
pub fn advance(
    session: &mut SessionTranscript,
    coder: &dyn Backend,
    communicator: &dyn Backend,
) -> Result<Vec<PendingQuestion>, SessionError> {
    if !session.status.is_active() {
        return Err(SessionError::NotActive(session.status));
    }
    let config = session.config_snapshot.clone();
    let mut next = session.clone();

    let iteration = next.revisions.len() as u32;
    let prompt = build_coder_prompt(&next.description, &next.exchanges, next.latest_revision());
    let output = call(coder, Role::Coder, &prompt)?;
    let (code, language_hint) = extract_code(&output)?;
    next.revisions.push(CodeRevision {
        iteration,
        code,
        language_hint,
        coder_prompt: prompt.text,
    });

    let mut pending = Vec::new();
    let mut decision = should_terminate(&next, &config, 1);
    if !decision.stop {
        let prompt = build_communicator_prompt(&next.description, next.latest_revision());
        let output = call(communicator, Role::Communicator, &prompt)?;
        let selected = rank_and_select(&parse_question_list(&output), &config);
        decision = should_terminate(&next, &config, selected.len());
        if !decision.stop {
            pending = selected
                .into_iter()
                .map(|question| PendingQuestion {
                    question_ref: QuestionRef::new(iteration, question.source_order),
                    question,
                })
                .collect();
        }
    }

    next.status = status_for(decision.reason);
    next.touch();
    *session = next;
    Ok(pending)
}

/// Records the user's reply to a round of pending questions.
///
/// Every pending question becomes an exchange, in selection order; those the
/// reply does not mention stay unanswered. A stopping reply ends the session
/// with `done_user_stop`.
pub fn record_answers(
    session: &mut SessionTranscript,
    pending: &[PendingQuestion],
    reply: RoundReply,
) -> Result<(), SessionError> {
    if !session.status.is_active() {
        return Err(SessionError::NotActive(session.status));
    }
    let mut by_ref = std::collections::HashMap::new();
    for answer in reply.answers {
        if !pending.iter().any(|p| p.question_ref == answer.question_ref) {
            return Err(SessionError::UnknownQuestion(answer.question_ref.to_string()));
        }
        answer.validate()?;
        let key = answer.question_ref.clone();
        if by_ref.insert(key.clone(), answer).is_some() {
            return Err(SessionError::DuplicateAnswer(key.to_string()));
        }
    }
    let asked_at = session.revisions.len().saturating_sub(1) as u32;
    for p in pending {
        session.exchanges.push(QAExchange {
            question: p.question.clone(),
            answer: by_ref.remove(&p.question_ref),
            asked_at_iteration: asked_at,
        });
    }
    if reply.stop {
        session.status = SessionStatus::DoneUserStop;
    }
    session.touch();
    Ok(())
}

/// One full loop iteration: generate, ask, collect answers.
pub fn run_iteration(
    session: &mut SessionTranscript,
    coder: &dyn Backend,
    communicator: &dyn Backend,
    answers: &mut dyn AnswerSource,
) -> Result<(), SessionError> {
    let pending = advance(session, coder, communicator)?;
    if pending.is_empty() {
        return Ok(());
    }
    let reply = answers.answer_round(&pending);
    record_answers(session, &pending, reply)
}

/// Iterates until the session leaves the active state.
pub fn run_to_completion(
    session: &mut SessionTranscript,
    coder: &dyn Backend,
    communicator: &dyn Backend,
    answers: &mut dyn AnswerSource,
) -> Result<(), SessionError> {
    while session.status.is_active() {
        run_iteration(session, coder, communicator, answers)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ScriptEntry, ScriptedBackend};
    use crate::fixtures;
    use crate::topic::QuestionTopic;

    fn fib() -> ProblemDescription {
        ProblemDescription::new(fixtures::FIB_DESCRIPTION).unwrap()
    }

    fn golden() -> ScriptedBackend {
        ScriptedBackend::from_json_str(fixtures::GOLDEN_SCRIPT).unwrap()
    }

    fn with_revisions(n: u32) -> SessionTranscript {
        let mut s = new_session(fib(), SessionConfig::default()).unwrap();
        for i in 0..n {
            s.revisions.push(CodeRevision {
                iteration: i,
                code: "x".into(),
                language_hint: None,
                coder_prompt: String::new(),
            });
        }
        s
    }

    #[test]
    fn new_session_is_empty_and_active() {
        let s = new_session(fib(), SessionConfig::default()).unwrap();
        assert_eq!(s.status, SessionStatus::Active);
        assert!(s.revisions.is_empty() && s.exchanges.is_empty());
        assert_eq!(s.config_snapshot, SessionConfig::default());

        let config = SessionConfig {
            max_iterations: 1,
            ..SessionConfig::default()
        };
        let s = new_session(fib(), config).unwrap();
        assert_eq!(s.config_snapshot.max_iterations, 1);
    }

    #[test]
    fn empty_description_is_rejected() {
        assert!(ProblemDescription::new("").is_err());
        assert!(ProblemDescription::new(" \n\t").is_err());
    }

    #[test]
    fn termination_rules() {
        let two = SessionConfig {
            max_iterations: 2,
            ..SessionConfig::default()
        };
        assert_eq!(
            should_terminate(&with_revisions(2), &two, 5),
            TerminationDecision {
                stop: true,
                reason: TerminationReason::MaxIterations
            }
        );
        let three = SessionConfig::default();
        assert_eq!(
            should_terminate(&with_revisions(1), &three, 0),
            TerminationDecision {
                stop: true,
                reason: TerminationReason::NoQuestions
            }
        );
        assert_eq!(
            should_terminate(&with_revisions(1), &three, 2),
            TerminationDecision::CONTINUE
        );
        let keep_going = SessionConfig {
            stop_when_no_questions: false,
            ..three
        };
        assert_eq!(
            should_terminate(&with_revisions(1), &keep_going, 0),
            TerminationDecision::CONTINUE
        );
        // budget wins over the empty-question rule
        assert_eq!(
            should_terminate(&with_revisions(2), &two, 0).reason,
            TerminationReason::MaxIterations
        );
    }

    #[test]
    fn golden_walkthrough() {
        let backend = golden();
        let mut s = new_session(fib(), SessionConfig::default()).unwrap();
        let mut user = ScriptedAnswers::new([fixtures::FIB_NEGATIVE_ANSWER]);

        run_iteration(&mut s, &backend, &backend, &mut user).unwrap();
        assert_eq!(s.revisions.len(), 1);
        assert_eq!(s.revisions[0].code, fixtures::FIB_INITIAL_CODE);
        assert_eq!(s.revisions[0].language_hint.as_deref(), Some("python"));
        assert_eq!(s.exchanges.len(), 3);
        assert_eq!(s.exchanges[0].question.topic, QuestionTopic::InputValidation);
        assert_eq!(
            s.exchanges[0].answer.as_ref().unwrap().text,
            fixtures::FIB_NEGATIVE_ANSWER
        );
        assert!(s.exchanges[1].answer.as_ref().unwrap().is_skipped());
        assert_eq!(s.status, SessionStatus::Active);

        run_iteration(&mut s, &backend, &backend, &mut user).unwrap();
        assert_eq!(s.revisions[1].code, fixtures::FIB_REFINED_CODE);
        assert!(s.revisions[1].coder_prompt.contains(fixtures::FIB_NEGATIVE_ANSWER));
        assert_eq!(s.status, SessionStatus::DoneNoQuestions);
        assert_eq!(backend.cursor(), 4);

        let err = run_iteration(&mut s, &backend, &backend, &mut user).unwrap_err();
        assert!(matches!(err, SessionError::NotActive(SessionStatus::DoneNoQuestions)));
    }

    #[test]
    fn single_iteration_budget_asks_nothing() {
        let backend = golden();
        let config = SessionConfig {
            max_iterations: 1,
            ..SessionConfig::default()
        };
        let mut s = new_session(fib(), config).unwrap();
        run_iteration(&mut s, &backend, &backend, &mut ScriptedAnswers::default()).unwrap();
        assert_eq!(s.revisions.len(), 1);
        assert!(s.exchanges.is_empty());
        assert_eq!(s.status, SessionStatus::DoneMaxIterations);
        assert_eq!(backend.cursor(), 1);
    }

    #[test]
    fn unparseable_questions_finish_the_session() {
        let coder = ScriptedBackend::new(vec![ScriptEntry::new("```\nprint(1)\n```")]);
        let communicator = ScriptedBackend::new(vec![ScriptEntry::new("Looks fine to me.")]);
        let mut s = new_session(fib(), SessionConfig::default()).unwrap();
        run_iteration(&mut s, &coder, &communicator, &mut ScriptedAnswers::default()).unwrap();
        assert_eq!(s.status, SessionStatus::DoneNoQuestions);
        assert_eq!(s.revisions.len(), 1);
    }

    #[test]
    fn backend_failure_leaves_session_untouched() {
        let coder = ScriptedBackend::new(vec![ScriptEntry::new("```\nprint(1)\n```")]);
        let communicator = ScriptedBackend::new(vec![]);
        let mut s = new_session(fib(), SessionConfig::default()).unwrap();
        let before = s.clone();
        let err = run_iteration(&mut s, &coder, &communicator, &mut ScriptedAnswers::default()).unwrap_err();
        assert!(matches!(
            err,
            SessionError::Backend {
                role: Role::Communicator,
                ..
            }
        ));
        assert_eq!(s, before);
    }

    #[test]
    fn stop_reply_ends_session() {
        let backend = golden();
        let mut s = new_session(fib(), SessionConfig::default()).unwrap();
        let mut user = ScriptedAnswers::new(["negative n is an error", "/stop"]);
        run_iteration(&mut s, &backend, &backend, &mut user).unwrap();
        assert_eq!(s.status, SessionStatus::DoneUserStop);
        assert_eq!(s.exchanges.len(), 3);
        assert!(s.exchanges[0].answer.is_some());
        assert!(s.exchanges[1].answer.is_none() && s.exchanges[2].answer.is_none());
        assert!(s.validate().is_ok());
    }

    #[test]
    fn record_answers_rejects_unknown_and_duplicate_refs() {
        let backend = golden();
        let mut s = new_session(fib(), SessionConfig::default()).unwrap();
        let pending = advance(&mut s, &backend, &backend).unwrap();
        assert_eq!(pending.len(), 3);
        assert_eq!(pending[0].question_ref.as_str(), "q0.0");

        let bogus = RoundReply {
            answers: vec![Answer::skipped("q9.9".into())],
            stop: false,
        };
        assert!(matches!(
            record_answers(&mut s.clone(), &pending, bogus),
            Err(SessionError::UnknownQuestion(_))
        ));

        let twice = RoundReply {
            answers: vec![Answer::skipped("q0.0".into()), Answer::skipped("q0.0".into())],
            stop: false,
        };
        assert!(matches!(
            record_answers(&mut s.clone(), &pending, twice),
            Err(SessionError::DuplicateAnswer(_))
        ));
    }
}
