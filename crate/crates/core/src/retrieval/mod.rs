//! Ranking articles by cosine similarity between query and title embeddings.

mod embedding;
mod rank;
mod remote;
mod tfidf;

pub use embedding::{cosine, EmbeddingProvider, EmbeddingVector, ProviderError};
pub use rank::{rank_titles, RankedHit};
pub use remote::HttpEmbeddingProvider;
pub use tfidf::{tfidf_embed, tfidf_fit, TfidfIndex, TfidfProvider};

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding provider failed: {0}")]
    Provider(#[from] ProviderError),
}
