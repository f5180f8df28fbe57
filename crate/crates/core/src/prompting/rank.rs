use crate::config::SessionConfig;

use super::ClarifyingQuestion;

/// Scores questions by topic weight and keeps the top of the list for the
/// configured communication level.
///
/// Ordering is score descending, then `source_order` ascending. `under`
/// keeps one question, `effective` keeps `questions_per_round`, `over` keeps
/// all of them.
pub fn rank_and_select(questions: &[ClarifyingQuestion], config: &SessionConfig) -> Vec<ClarifyingQuestion> {
    let mut scored: Vec<ClarifyingQuestion> = questions
        .iter()
        .map(|q| ClarifyingQuestion {
            score: config.topic_priorities.get(&q.topic),
            ..q.clone()
        })
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.source_order.cmp(&b.source_order)));
    if let Some(limit) = config.round_limit() {
        scored.truncate(limit);
    }
    scored
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CommunicationLevel;
    use crate::fixtures;
    use crate::prompting::parse_question_list;
    use crate::topic::QuestionTopic;

    #[test]
    fn negative_input_question_ranks_first_on_table_fixture() {
        let qs = parse_question_list(fixtures::TAXONOMY_QUESTIONS);
        let selected = rank_and_select(&qs, &SessionConfig::default());
        assert_eq!(selected.len(), 3);
        assert_eq!(selected[0].topic, QuestionTopic::InputValidation);
        assert_eq!(selected[0].text, "Should input validation be part of the function?");
        assert_eq!(selected[0].score, 10.0);
        assert_eq!(selected[1].source_order, 1);
        assert_eq!(selected[2].topic, QuestionTopic::ErrorHandling);
        assert!(selected[2].text.contains("negative"));
    }

    #[test]
    fn singleton_is_selected_at_every_level() {
        let q = vec![ClarifyingQuestion::new(QuestionTopic::Other("x".into()), "Why?", 0)];
        for level in [
            CommunicationLevel::Under,
            CommunicationLevel::Effective,
            CommunicationLevel::Over,
        ] {
            let config = SessionConfig {
                communication_level: level,
                ..SessionConfig::default()
            };
            let got = rank_and_select(&q, &config);
            assert_eq!(got.len(), 1);
            assert_eq!(got[0].text, "Why?");
            assert_eq!(got[0].score, 0.0);
        }
    }

    #[test]
    fn scaling_weights_keeps_selection() {
        let qs = parse_question_list(fixtures::TAXONOMY_QUESTIONS);
        let base = SessionConfig {
            communication_level: CommunicationLevel::Over,
            ..SessionConfig::default()
        };
        let doubled = SessionConfig {
            topic_priorities: base.topic_priorities.scaled(2.0),
            ..base.clone()
        };
        let order =
            |c: &SessionConfig| -> Vec<u32> { rank_and_select(&qs, c).iter().map(|q| q.source_order).collect() };
        assert_eq!(order(&base), order(&doubled));
    }

    #[test]
    fn over_level_keeps_everything_sorted() {
        let qs = parse_question_list(fixtures::TAXONOMY_QUESTIONS);
        let config = SessionConfig {
            communication_level: CommunicationLevel::Over,
            ..SessionConfig::default()
        };
        let got = rank_and_select(&qs, &config);
        assert_eq!(got.len(), 24);
        assert!(got.windows(2).all(|w| w[0].score >= w[1].score));
        assert_eq!(got.last().unwrap().topic, QuestionTopic::UseCaseAndContext);
    }
}
