use serde::{Deserialize, Serialize};

use super::{FilterDecision, TopicError};
use crate::corpus::{terms, Article};

/// Whether an article must contain any or all of the keywords to be retained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeywordMode {
    #[default]
    Any,
    All,
}

/// Scores every article by the fraction of keywords whose token sequence occurs
/// contiguously in its tokenized full text.
///
/// Decisions are returned in corpus order; each depends only on its own article.
pub fn keyword_filter(
    corpus: &[Article],
    keywords: &[String],
    mode: KeywordMode,
) -> Result<Vec<FilterDecision>, TopicError> {
    if keywords.is_empty() {
        return Err(TopicError::EmptyKeywords);
    }
    let patterns = keywords
        .iter()
        .map(|k| {
            let toks = terms(k);
            if toks.is_empty() {
                Err(TopicError::BlankKeyword(k.clone()))
            } else {
                Ok(toks)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(corpus
        .iter()
        .map(|article| {
            let text = terms(&article.full_text());
            let matched = patterns
                .iter()
                .filter(|p| contains_sequence(&text, p))
                .count();
            let retained = match mode {
                KeywordMode::Any => matched > 0,
                KeywordMode::All => matched == patterns.len(),
            };
            FilterDecision {
                article_id: article.id.clone(),
                score: matched as f64 / patterns.len() as f64,
                retained,
            }
        })
        .collect())
}

fn contains_sequence(haystack: &[String], needle: &[String]) -> bool {
    needle.len() <= haystack.len() && haystack.windows(needle.len()).any(|w| w == needle)
}
