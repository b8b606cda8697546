//! Article filtering: keyword matching and LDA topic relevance.

mod filter;
mod js;
mod keyword;
mod lda;
mod persist;

pub use filter::{topic_filter, FilterDecision, FilterRule};
pub(crate) use filter::rank_order;
pub use js::{js_distance, kl_divergence_bits};
pub use keyword::{keyword_filter, KeywordMode};
pub use lda::{
    fit_lda, infer_doc_topics, GibbsState, LdaParams, LdaSampler, TopicModel, RNG_ALGORITHM,
};
pub use persist::{read_model, write_model, ModelHeader, MODEL_MAGIC};

/// Tolerance on the sum of an input probability vector.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum TopicError {
    #[error("keyword list is empty")]
    EmptyKeywords,
    #[error("keyword {0:?} contains no tokens")]
    BlankKeyword(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no documents to fit")]
    NoDocuments,
    #[error("document {article_id:?} has no tokens")]
    EmptyDocument { article_id: String },
    #[error("document {article_id:?} has token {token} outside vocabulary of size {vocab_size}")]
    TokenOutOfRange {
        article_id: String,
        token: usize,
        vocab_size: usize,
    },
    #[error("document {article_id:?} has no in-vocabulary tokens")]
    AllOutOfVocabulary { article_id: String },
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("not a probability vector: {0}")]
    NotProbability(String),
    #[error("exactly one of threshold or top-m must be given")]
    AmbiguousRule,
    #[error("malformed model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Checks that `p` is a probability vector within [`PROBABILITY_SUM_TOLERANCE`].
pub(crate) fn check_probability(p: &[f64]) -> Result<(), TopicError> {
    if p.is_empty() {
        return Err(TopicError::NotProbability("empty vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(TopicError::NotProbability(format!("entry {x}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(TopicError::NotProbability(format!("sum {sum}")));
    }
    Ok(())
}
