//! On-disk index bundle.
//!
//! ```text
//! <dir>/manifest.json     config, seeds, corpus hash, build diagnostics
//! <dir>/corpus.jsonl      the accepted articles, one per line
//! <dir>/vocab.json        vocabulary terms in index order
//! <dir>/tfidf.json        {vocab, idf}
//! <dir>/lda.ldaf          topic model (lda-filter only)
//! <dir>/doc_topics.json   per-article topic mixtures (lda-filter only)
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::{info, warn};

use super::{PipelineConfig, PipelineError, PipelineKind};
use crate::corpus::{parse_corpus_jsonl, tokenize_corpus, Article, RecordDiagnostic, TokenizedDoc, Vocabulary};
use crate::retrieval::{tfidf_fit, TfidfIndex};
use crate::topicfilter::{read_model, write_model, LdaSampler, TopicModel, RNG_ALGORITHM};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;
const LOCK_FILE: &str = ".build.lock";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub config: PipelineConfig,
    pub corpus_sha256: String,
    pub article_count: usize,
    pub vocab_size: usize,
    pub skipped_records: Vec<RecordDiagnostic>,
    pub duplicate_ids: Vec<String>,
    /// Articles left out of the LDA fit for having fewer than `min_tokens` tokens.
    pub lda_excluded: Vec<String>,
    pub rng: String,
}

/// Topic model plus the fitted mixture of every article that took part in the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicIndex {
    pub model: TopicModel,
    pub doc_topics: Vec<(String, Vec<f64>)>,
}

#[derive(Debug)]
pub struct IndexBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub articles: Vec<Article>,
    pub vocab: Vocabulary,
    pub docs: Vec<TokenizedDoc>,
    pub tfidf: Arc<TfidfIndex>,
    pub topics: Option<TopicIndex>,
}

impl IndexBundle {
    pub fn article(&self, id: &str) -> Option<&Article> {
        self.articles.iter().find(|a| a.id == id)
    }

    pub fn open(dir: &Path) -> Result<Self, PipelineError> {
        let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
        if manifest.format_version != BUNDLE_FORMAT_VERSION {
            return Err(PipelineError::Bundle(format!(
                "bundle format {} is not supported (expected {BUNDLE_FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        let corpus_raw = read_text(&dir.join("corpus.jsonl"))?;
        let loaded = parse_corpus_jsonl(&corpus_raw);
        if !loaded.skipped.is_empty() || loaded.articles.len() != manifest.article_count {
            return Err(PipelineError::Bundle("corpus.jsonl does not match manifest".into()));
        }
        let vocab: Vocabulary = read_json(&dir.join("vocab.json"))?;
        let tfidf: TfidfIndex = read_json(&dir.join("tfidf.json"))?;
        let (rebuilt_vocab, docs) = tokenize_corpus(&loaded.articles);
        if rebuilt_vocab != vocab {
            return Err(PipelineError::Bundle("vocab.json does not match corpus".into()));
        }

        let topics = if manifest.config.pipeline == PipelineKind::LdaFilter {
            let path = dir.join("lda.ldaf");
            let file = File::open(&path).map_err(|source| PipelineError::Io { path, source })?;
            let model = read_model(BufReader::new(file))?;
            if model.vocab_hash != vocab.content_hash() {
                return Err(PipelineError::Bundle("topic model was fitted on another vocabulary".into()));
            }
            let doc_topics: Vec<(String, Vec<f64>)> = read_json(&dir.join("doc_topics.json"))?;
            Some(TopicIndex { model, doc_topics })
        } else {
            None
        };

        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            articles: loaded.articles,
            vocab,
            docs,
            tfidf: Arc::new(tfidf),
            topics,
        })
    }
}

/// Holds the bundle lock file for the duration of a build.
struct BuildLock(PathBuf);

impl BuildLock {
    fn acquire(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(PipelineError::Locked(path)),
            Err(source) => Err(PipelineError::Io { path, source }),
        }
    }
}

impl Drop for BuildLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// Reads the corpus, builds every index the config needs and writes them to `out_dir`.
pub fn build_index(corpus_path: &Path, config: &PipelineConfig, out_dir: &Path) -> Result<IndexBundle, PipelineError> {
    config.validate()?;
    let raw = fs::read(corpus_path).map_err(|source| PipelineError::Io {
        path: corpus_path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(raw.clone())
        .map_err(|e| PipelineError::Bundle(format!("{} is not UTF-8: {e}", corpus_path.display())))?;
    let loaded = parse_corpus_jsonl(&text);
    if loaded.articles.is_empty() {
        return Err(PipelineError::Bundle(format!(
            "{} contains no valid articles",
            corpus_path.display()
        )));
    }

    fs::create_dir_all(out_dir).map_err(|source| PipelineError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let _lock = BuildLock::acquire(out_dir)?;

    let (vocab, docs) = tokenize_corpus(&loaded.articles);
    let tfidf = tfidf_fit(&docs, &vocab);

    let mut lda_excluded = Vec::new();
    let topics = if config.pipeline == PipelineKind::LdaFilter {
        let (fit_docs, short): (Vec<TokenizedDoc>, Vec<TokenizedDoc>) =
            docs.iter().cloned().partition(|d| d.len() >= config.lda.min_tokens.max(1));
        lda_excluded = short.into_iter().map(|d| d.article_id).collect();
        for id in &lda_excluded {
            warn!(article = %id, min_tokens = config.lda.min_tokens, "article too short for topic model");
        }
        if fit_docs.is_empty() {
            return Err(PipelineError::Bundle(format!(
                "no article has at least {} tokens to fit the topic model",
                config.lda.min_tokens
            )));
        }
        let mut sampler = LdaSampler::new(&fit_docs, vocab.len(), config.lda.params())?;
        sampler.run();
        Some(TopicIndex {
            model: sampler.model(vocab.content_hash()),
            doc_topics: sampler.doc_topics(),
        })
    } else {
        None
    };

    let manifest = Manifest {
        format_version: BUNDLE_FORMAT_VERSION,
        config: config.clone(),
        corpus_sha256: hex::encode(Sha256::digest(&raw)),
        article_count: loaded.articles.len(),
        vocab_size: vocab.len(),
        skipped_records: loaded.skipped.clone(),
        duplicate_ids: loaded.duplicate_ids.clone(),
        lda_excluded,
        rng: RNG_ALGORITHM.to_string(),
    };

    let mut corpus_out = String::new();
    for article in &loaded.articles {
        corpus_out.push_str(&serde_json::to_string(article).expect("article serializes"));
        corpus_out.push('\n');
    }
    write_bytes(&out_dir.join("corpus.jsonl"), corpus_out.as_bytes())?;
    write_json(&out_dir.join("vocab.json"), &vocab)?;
    write_json(&out_dir.join("tfidf.json"), &tfidf)?;
    let stale = ["lda.ldaf", "doc_topics.json"];
    match &topics {
        Some(t) => {
            let path = out_dir.join("lda.ldaf");
            let file = File::create(&path).map_err(|source| PipelineError::Io { path: path.clone(), source })?;
            write_model(&t.model, BufWriter::new(file))?;
            write_json(&out_dir.join("doc_topics.json"), &t.doc_topics)?;
        }
        None => {
            for name in stale {
                let _ = fs::remove_file(out_dir.join(name));
            }
        }
    }
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    info!(dir = %out_dir.display(), articles = manifest.article_count, "index bundle written");

    Ok(IndexBundle {
        dir: out_dir.to_path_buf(),
        manifest,
        articles: loaded.articles,
        vocab,
        docs,
        tfidf: Arc::new(tfidf),
        topics,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let io_err = |source| PipelineError::Io { path: path.to_path_buf(), source };
    let mut file = File::create(path).map_err(io_err)?;
    file.write_all(bytes).map_err(io_err)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("bundle data serializes");
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| PipelineError::Bundle(format!("{}: {e}", path.display())))
}
