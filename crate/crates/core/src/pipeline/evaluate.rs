use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Engine, PipelineError};
use crate::corpus::{load_qa_dataset, merge_qa_with_corpus, Article, QAExample};
use crate::eval::{evaluate, EvalError, EvalReport, LengthUnit};
use crate::reader::{bounded_map, Reader, ReaderError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Readers get each example's own context.
    #[default]
    Rc,
    /// Contexts come from the full retrieve-then-read pipeline.
    Pipeline,
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rc" => Ok(Self::Rc),
            "pipeline" => Ok(Self::Pipeline),
            other => Err(format!("unknown eval mode {other:?} (expected rc or pipeline)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRun {
    pub report: EvalReport,
    pub diagnostics: Vec<String>,
}

/// Loads a QA dataset; skipped records become diagnostics.
pub fn load_dataset(path: &Path) -> Result<(Vec<QAExample>, Vec<String>), PipelineError> {
    let loaded = load_qa_dataset(path)?;
    let mut diagnostics: Vec<String> = loaded
        .skipped
        .iter()
        .map(|d| format!("skipped line {}: {}", d.line, d.reason))
        .collect();
    diagnostics.extend(
        loaded
            .non_extractive
            .iter()
            .map(|id| format!("example {id}: no gold answer occurs in its context")),
    );
    if loaded.examples.is_empty() {
        return Err(EvalError::EmptyDataset.into());
    }
    Ok((loaded.examples, diagnostics))
}

pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// Reading-comprehension evaluation: every example is answered from its own context.
///
/// When `corpus` is given, examples without context get their article's text first.
/// Generative readers receive the question only.
pub fn run_eval_rc(
    reader: &dyn Reader,
    examples: Vec<QAExample>,
    corpus: Option<&[Article]>,
    concurrency: usize,
    dataset_name: &str,
    system_name: &str,
) -> Result<EvalRun, PipelineError> {
    let mut diagnostics = Vec::new();
    let examples = match corpus {
        Some(articles) => {
            let merged = merge_qa_with_corpus(examples, articles);
            diagnostics.extend(
                merged
                    .dropped
                    .iter()
                    .map(|id| format!("example {id}: referenced article not in corpus, dropped")),
            );
            merged.examples
        }
        None => examples,
    };
    if examples.is_empty() {
        return Err(EvalError::EmptyDataset.into());
    }

    let outputs = bounded_map(&examples, concurrency, |ex| {
        if reader.is_generative() {
            reader.answer(&ex.question, None)
        } else {
            match &ex.context {
                Some(ctx) => reader.answer(&ex.question, Some(ctx)),
                None => Err(ReaderError::ContextRequired),
            }
        }
    });

    let mut predictions = BTreeMap::new();
    for (ex, output) in examples.iter().zip(outputs) {
        match output {
            Ok(out) => {
                predictions.insert(ex.id.clone(), out.top_text().to_string());
            }
            Err(e) if e.is_retryable() || matches!(e, ReaderError::InvalidSpan { .. }) => {
                return Err(e.into())
            }
            Err(e) => diagnostics.push(format!("example {}: {e}", ex.id)),
        }
    }
    let report = evaluate(&predictions, &examples, dataset_name, system_name, LengthUnit::default())?;
    Ok(EvalRun { report, diagnostics })
}

impl Engine {
    pub fn run_eval(&self, dataset_path: &Path, mode: EvalMode) -> Result<EvalRun, PipelineError> {
        let (examples, mut diagnostics) = load_dataset(dataset_path)?;
        let name = dataset_name(dataset_path);
        let system = self.config().system_name();
        let mut run = match mode {
            EvalMode::Rc => run_eval_rc(
                self.reader(),
                examples,
                Some(&self.bundle().articles),
                self.config().reader.concurrency,
                &name,
                &system,
            )?,
            EvalMode::Pipeline => {
                let mut predictions = BTreeMap::new();
                for ex in &examples {
                    let result = self.answer_question(&ex.question, None)?;
                    predictions.insert(ex.id.clone(), result.top_answer().to_string());
                }
                let report = evaluate(&predictions, &examples, &name, &system, LengthUnit::default())?;
                EvalRun { report, diagnostics: Vec::new() }
            }
        };
        diagnostics.append(&mut run.diagnostics);
        run.diagnostics = diagnostics;
        Ok(run)
    }
}
