//! Readers map a question (and, for extractive readers, a context) to answers.

mod baseline;
mod client;
mod stopwords;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

pub use baseline::{baseline_extract, content_terms, DEFAULT_TOP_K, DEFAULT_WINDOW};
pub use client::{
    ExtractResponse, ExtractiveClient, GenerateRequest, GenerateResponse, GenerativeClient, WireSpan,
};
pub use stopwords::{is_stopword, STOPWORDS, STOPWORDS_VERSION};

use crate::corpus::{char_slice, tokenize};
use crate::http::TransportError;

/// An extractive answer: `text` is exactly `context[char_start..char_end]` (in chars).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerSpan {
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
    pub score: f64,
}

impl AnswerSpan {
    pub fn validate(&self, context: &str) -> Result<(), String> {
        if self.char_start >= self.char_end {
            return Err(format!(
                "empty or inverted range {}..{}",
                self.char_start, self.char_end
            ));
        }
        match char_slice(context, self.char_start, self.char_end) {
            None => Err(format!(
                "range {}..{} exceeds context of {} chars",
                self.char_start,
                self.char_end,
                context.chars().count()
            )),
            Some(slice) if slice != self.text => {
                Err(format!("context slice {slice:?} differs from span text"))
            }
            Some(_) => Ok(()),
        }
    }
}

/// Closed-book answer text. An empty reply is kept as an explicit abstention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedAnswer {
    pub text: String,
    pub abstained: bool,
}

impl GeneratedAnswer {
    pub fn from_text(text: String) -> Self {
        let abstained = text.trim().is_empty();
        Self { text, abstained }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ReaderOutput {
    Spans(Vec<AnswerSpan>),
    Generated(GeneratedAnswer),
}

impl ReaderOutput {
    /// Text of the best answer, empty when there is none.
    pub fn top_text(&self) -> &str {
        match self {
            Self::Spans(spans) => spans.first().map_or("", |s| s.text.as_str()),
            Self::Generated(g) => g.text.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReaderError {
    #[error("context has no tokens")]
    EmptyContext,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("extractive reader needs a context")]
    ContextRequired,
    #[error("generative reader is closed-book and does not accept a context")]
    ContextNotAllowed,
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("reader returned invalid span #{index} {text:?} at {start}..{end}: {detail}")]
    InvalidSpan {
        index: usize,
        text: String,
        start: usize,
        end: usize,
        detail: String,
    },
}

impl ReaderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Transport(t) if t.is_retryable())
    }
}

/// Unified reader contract: extractive readers need a context, generative ones refuse it.
pub trait Reader: Send + Sync {
    fn name(&self) -> &str;

    fn is_generative(&self) -> bool {
        false
    }

    fn answer(&self, question: &str, context: Option<&str>) -> Result<ReaderOutput, ReaderError>;
}

/// The overlap reader with fixed window and top-k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineReader {
    pub window: usize,
    pub top_k: usize,
}

impl Default for BaselineReader {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl Reader for BaselineReader {
    fn name(&self) -> &str {
        "baseline"
    }

    fn answer(&self, question: &str, context: Option<&str>) -> Result<ReaderOutput, ReaderError> {
        let context = context.ok_or(ReaderError::ContextRequired)?;
        baseline_extract(question, context, self.window, self.top_k).map(ReaderOutput::Spans)
    }
}

/// Number of tokens in `text` under the corpus tokenizer.
pub fn answer_length(text: &str) -> usize {
    tokenize(text).len()
}

/// Runs `reader` over several contexts with at most `concurrency` requests in
/// flight. Results come back in input order.
pub fn answer_many(
    reader: &dyn Reader,
    question: &str,
    contexts: &[&str],
    concurrency: usize,
) -> Vec<Result<ReaderOutput, ReaderError>> {
    bounded_map(contexts, concurrency, |c| reader.answer(question, Some(c)))
}

/// Applies `f` to every item on at most `concurrency` threads, keeping input order.
pub fn bounded_map<T, R, F>(items: &[T], concurrency: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = concurrency.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let out = f(&items[i]);
                slots.lock().expect("result slots poisoned")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}
