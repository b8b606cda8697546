use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{js_distance, TopicError, TopicModel};

/// Outcome of filtering one article. `score` is in `[0, 1]`, higher is more relevant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub article_id: String,
    pub score: f64,
    pub retained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRule {
    /// Retain articles scoring at least this value.
    Threshold(f64),
    /// Retain the `m` highest-scoring articles.
    TopM(usize),
}

impl FilterRule {
    pub fn from_options(threshold: Option<f64>, top_m: Option<usize>) -> Result<Self, TopicError> {
        match (threshold, top_m) {
            (Some(t), None) => Ok(Self::Threshold(t)),
            (None, Some(m)) => Ok(Self::TopM(m)),
            _ => Err(TopicError::AmbiguousRule),
        }
    }
}

/// Descending score, then ascending article id.
pub(crate) fn rank_order(a: &FilterDecision, b: &FilterDecision) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.article_id.cmp(&b.article_id))
}

/// Scores each document mixture against the query mixture as `1 - JS distance`.
///
/// Decisions come back ranked by descending score with ties broken by ascending
/// article id; under [`FilterRule::TopM`] exactly the first `m` are retained.
pub fn topic_filter(
    model: &TopicModel,
    docs_theta: &[(String, Vec<f64>)],
    query_theta: &[f64],
    rule: FilterRule,
) -> Result<Vec<FilterDecision>, TopicError> {
    if query_theta.len() != model.topics {
        return Err(TopicError::LengthMismatch {
            left: query_theta.len(),
            right: model.topics,
        });
    }
    let mut decisions = docs_theta
        .iter()
        .map(|(id, theta)| {
            Ok(FilterDecision {
                article_id: id.clone(),
                score: 1.0 - js_distance(theta, query_theta)?,
                retained: false,
            })
        })
        .collect::<Result<Vec<_>, TopicError>>()?;

    decisions.sort_by(rank_order);
    for (rank, decision) in decisions.iter_mut().enumerate() {
        decision.retained = match rule {
            FilterRule::Threshold(tau) => decision.score >= tau,
            FilterRule::TopM(m) => rank < m,
        };
    }
    Ok(decisions)
}
