//! SQuAD-style answer scoring and report rendering.

mod metrics;
mod report;

pub use metrics::{exact_match, normalize_answer, token_f1};
pub use report::{
    evaluate, length_histogram, load_predictions, render_table, EvalExampleResult, EvalReport,
    LengthUnit,
};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("duplicate example id {0:?}")]
    DuplicateExample(String),
    #[error("example {0:?} has no gold answers")]
    NoGold(String),
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("malformed file: {0}")]
    Format(String),
}
