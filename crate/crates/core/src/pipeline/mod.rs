//! End-to-end orchestration: index bundles, question answering and evaluation runs.

mod bundle;
mod config;
mod evaluate;
mod query;

use std::path::PathBuf;

pub use bundle::{build_index, IndexBundle, Manifest, TopicIndex, BUNDLE_FORMAT_VERSION};
pub use config::{
    LdaConfig, PipelineConfig, PipelineKind, ProviderConfig, ProviderKind, ReaderConfig, ReaderKind,
    DEFAULT_TOPIC_TOP_M, EMBED_ENDPOINT_ENV, READER_ENDPOINT_ENV,
};
pub use evaluate::{dataset_name, load_dataset, run_eval_rc, EvalMode, EvalRun};
pub use query::{
    answer_question, build_provider, build_reader, ArticleAnswer, Engine, QueryResult,
    DIAG_FILTER_ELIMINATED_ALL,
};

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::reader::ReaderError;
use crate::retrieval::RetrievalError;
use crate::topicfilter::TopicError;

/// Broad failure class, used for exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    External,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bundle: {0}")]
    Bundle(String),
    #[error("another build holds {0}")]
    Locked(PathBuf),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Reader(#[from] ReaderError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl PipelineError {
    pub fn class(&self) -> ErrorClass {
        match self {
            Self::Config(_) => ErrorClass::Usage,
            Self::Retrieval(RetrievalError::Provider(_)) => ErrorClass::External,
            Self::Reader(ReaderError::Transport(_) | ReaderError::InvalidSpan { .. }) => ErrorClass::External,
            Self::Reader(ReaderError::ContextNotAllowed | ReaderError::InvalidArgument(_)) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }
}
