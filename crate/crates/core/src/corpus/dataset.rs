use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{Article, CorpusError, RecordDiagnostic};

/// A question with its gold answers and, for reading-comprehension data, the text
/// the answers were taken from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAExample {
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub context: Option<String>,
    #[serde(default)]
    pub article_id: Option<String>,
    #[serde(rename = "answers")]
    pub gold_answers: Vec<String>,
}

impl QAExample {
    /// True when there is no context, or some gold answer occurs verbatim in it.
    pub fn is_extractive(&self) -> bool {
        match &self.context {
            None => true,
            Some(ctx) => self.gold_answers.iter().any(|g| ctx.contains(g.as_str())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedDataset {
    pub examples: Vec<QAExample>,
    pub skipped: Vec<RecordDiagnostic>,
    /// Ids of examples whose context contains none of their gold answers.
    pub non_extractive: Vec<String>,
}

pub fn load_qa_dataset(path: &Path) -> Result<LoadedDataset, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_qa_jsonl(&raw))
}

pub fn parse_qa_jsonl(raw: &str) -> LoadedDataset {
    let mut out = LoadedDataset::default();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let example: QAExample = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(e) => {
                out.skipped.push(RecordDiagnostic::new(line_no, e.to_string()));
                continue;
            }
        };
        if example.gold_answers.is_empty() {
            out.skipped
                .push(RecordDiagnostic::new(line_no, "answers must be non-empty"));
            continue;
        }
        if !example.is_extractive() {
            warn!(id = %example.id, "no gold answer occurs in the example context");
            out.non_extractive.push(example.id.clone());
        }
        out.examples.push(example);
    }
    for diag in &out.skipped {
        warn!(line = diag.line, reason = %diag.reason, "skipped malformed QA record");
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergeOutcome {
    pub examples: Vec<QAExample>,
    /// Ids of examples dropped because their referenced article is not in the corpus.
    pub dropped: Vec<String>,
}

/// Fills missing contexts from the referenced article's full text.
///
/// Examples that already carry a context, or that reference no article, pass through
/// unchanged. Gold answers are never touched.
pub fn merge_qa_with_corpus(examples: Vec<QAExample>, corpus: &[Article]) -> MergeOutcome {
    let by_id: HashMap<&str, &Article> = corpus.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut out = MergeOutcome::default();
    for mut example in examples {
        if example.context.is_none() {
            if let Some(article_id) = &example.article_id {
                match by_id.get(article_id.as_str()) {
                    Some(article) => example.context = Some(article.full_text()),
                    None => {
                        out.dropped.push(example.id);
                        continue;
                    }
                }
            }
        }
        out.examples.push(example);
    }
    if !out.dropped.is_empty() {
        warn!(count = out.dropped.len(), "dropped QA examples with unresolvable article ids");
    }
    out
}

/// Ids occurring more than once, in first-repeat order.
pub fn duplicate_example_ids(examples: &[QAExample]) -> Vec<String> {
    let mut seen = HashSet::new();
    examples
        .iter()
        .filter(|e| !seen.insert(e.id.as_str()))
        .map(|e| e.id.clone())
        .collect()
}
