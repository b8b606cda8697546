//! Corpus ingestion, tokenization and QA dataset handling.

mod article;
mod dataset;
mod tokenize;
mod vocab;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use article::{load_corpus, parse_corpus_jsonl, Article, CorpusFormat, LoadedCorpus};
pub use dataset::{
    duplicate_example_ids, load_qa_dataset, merge_qa_with_corpus, parse_qa_jsonl, LoadedDataset,
    MergeOutcome, QAExample,
};
pub use tokenize::{char_slice, terms, tokenize, Token};
pub use vocab::Vocabulary;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A record that was skipped during loading, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordDiagnostic {
    pub line: usize,
    pub reason: String,
}

impl RecordDiagnostic {
    pub fn new(line: usize, reason: impl Into<String>) -> Self {
        Self {
            line,
            reason: reason.into(),
        }
    }
}

/// A document in vocabulary-index form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub article_id: String,
    pub tokens: Vec<usize>,
    /// Char range of each token in the source text.
    pub char_offsets: Vec<(usize, usize)>,
}

impl TokenizedDoc {
    /// Tokenizes `text`, adding unseen terms to `vocab`.
    pub fn build(article_id: impl Into<String>, text: &str, vocab: &mut Vocabulary) -> Self {
        let mut doc = Self::empty(article_id);
        for tok in tokenize(text) {
            let (start, end) = (tok.start, tok.end);
            doc.tokens.push(vocab.intern(tok.term));
            doc.char_offsets.push((start, end));
        }
        doc
    }

    /// Tokenizes `text` against a frozen vocabulary, dropping out-of-vocabulary terms.
    pub fn lookup(article_id: impl Into<String>, text: &str, vocab: &Vocabulary) -> Self {
        let mut doc = Self::empty(article_id);
        for tok in tokenize(text) {
            if let Some(idx) = vocab.index_of(&tok.term) {
                doc.tokens.push(idx);
                doc.char_offsets.push((tok.start, tok.end));
            }
        }
        doc
    }

    fn empty(article_id: impl Into<String>) -> Self {
        Self {
            article_id: article_id.into(),
            tokens: Vec::new(),
            char_offsets: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tokenizes every article's full text into a shared vocabulary.
pub fn tokenize_corpus(articles: &[Article]) -> (Vocabulary, Vec<TokenizedDoc>) {
    let mut vocab = Vocabulary::new();
    let docs = articles
        .iter()
        .map(|a| TokenizedDoc::build(a.id.clone(), &a.full_text(), &mut vocab))
        .collect();
    (vocab, docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_lookup_agree_on_known_terms() {
        let mut vocab = Vocabulary::new();
        let doc = TokenizedDoc::build("a", "RNA virus, RNA", &mut vocab);
        assert_eq!(doc.tokens, vec![0, 1, 0]);
        assert_eq!(doc.char_offsets, vec![(0, 3), (4, 9), (11, 14)]);
        assert!(doc.tokens.iter().all(|&t| t < vocab.len()));

        let q = TokenizedDoc::lookup("q", "unknown virus", &vocab);
        assert_eq!(q.tokens, vec![1]);
        assert_eq!(q.char_offsets, vec![(8, 13)]);
    }
}
