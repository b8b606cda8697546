//! Retrieval-augmented question answering over scientific article corpora.
//!
//! Two retrieve-then-read pipelines are provided: keyword filtering followed by
//! title-embedding cosine ranking, and LDA topic filtering. Both feed an extractive
//! reader. A closed-book generative reader answers from the question alone. The
//! [`eval`] module scores any of them with SQuAD-style F1 and exact match.

pub mod corpus;
pub mod topicfilter;
pub mod http;
pub mod retrieval;
pub mod reader;
pub mod eval;
pub mod pipeline;
