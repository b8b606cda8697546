use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{CorpusError, RecordDiagnostic};

/// One document of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub paragraphs: Vec<String>,
    /// Journal, publish date, url and similar free-form metadata.
    #[serde(default, rename = "meta")]
    pub source_meta: BTreeMap<String, String>,
}

impl Article {
    /// Title, abstract and paragraphs joined by blank lines, skipping empty parts.
    ///
    /// This is the text the readers see and the text all token offsets refer to.
    pub fn full_text(&self) -> String {
        std::iter::once(self.title.as_str())
            .chain(std::iter::once(self.abstract_text.as_str()))
            .chain(self.paragraphs.iter().map(String::as_str))
            .filter(|part| !part.is_empty())
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

/// Supported on-disk corpus layouts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    /// One JSON object per line.
    #[default]
    JsonLines,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedCorpus {
    pub articles: Vec<Article>,
    pub skipped: Vec<RecordDiagnostic>,
    /// Ids seen more than once; only the first record was kept.
    pub duplicate_ids: Vec<String>,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadedCorpus, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        CorpusFormat::JsonLines => Ok(parse_corpus_jsonl(&raw)),
    }
}

pub fn parse_corpus_jsonl(raw: &str) -> LoadedCorpus {
    let mut out = LoadedCorpus::default();
    let mut seen = HashSet::new();

    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let article: Article = match serde_json::from_str(line) {
            Ok(a) => a,
            Err(e) => {
                out.skipped.push(RecordDiagnostic::new(line_no, e.to_string()));
                continue;
            }
        };
        if article.title.is_empty() && article.abstract_text.is_empty() {
            out.skipped
                .push(RecordDiagnostic::new(line_no, "title and abstract are both empty"));
            continue;
        }
        if !seen.insert(article.id.clone()) {
            warn!(id = %article.id, line = line_no, "duplicate article id, keeping first");
            out.duplicate_ids.push(article.id);
            continue;
        }
        out.articles.push(article);
    }
    for diag in &out.skipped {
        warn!(line = diag.line, reason = %diag.reason, "skipped malformed corpus record");
    }
    out
}
