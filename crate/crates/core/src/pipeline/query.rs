use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{IndexBundle, PipelineConfig, PipelineError, PipelineKind, ProviderKind, ReaderKind};
use crate::corpus::{Article, TokenizedDoc};
use crate::reader::{
    bounded_map, AnswerSpan, BaselineReader, ExtractiveClient, GeneratedAnswer, GenerativeClient,
    Reader, ReaderError, ReaderOutput,
};
use crate::retrieval::{rank_titles, EmbeddingProvider, HttpEmbeddingProvider, RankedHit, TfidfProvider};
use crate::topicfilter::{infer_doc_topics, keyword_filter, topic_filter, FilterDecision, TopicError};

pub const DIAG_FILTER_ELIMINATED_ALL: &str = "filter eliminated all articles";

/// One extractive answer together with the article it was read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleAnswer {
    pub article_id: String,
    #[serde(flatten)]
    pub span: AnswerSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub question: String,
    pub hits: Vec<RankedHit>,
    /// Extractive answers over all hits, best reader score first.
    pub answers: Vec<ArticleAnswer>,
    /// Full text of every article that produced an answer; span offsets index into it.
    pub contexts: BTreeMap<String, String>,
    /// Closed-book answer; set only on the generative path.
    pub generated: Option<GeneratedAnswer>,
    pub diagnostics: Vec<String>,
    /// Wall-clock milliseconds per stage. Not part of the deterministic output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<BTreeMap<String, f64>>,
}

impl QueryResult {
    fn empty(question: &str) -> Self {
        Self {
            question: question.to_string(),
            hits: Vec::new(),
            answers: Vec::new(),
            contexts: BTreeMap::new(),
            generated: None,
            diagnostics: Vec::new(),
            timing: Some(BTreeMap::new()),
        }
    }

    /// Text of the best answer, empty when there is none.
    pub fn top_answer(&self) -> &str {
        match &self.generated {
            Some(g) => &g.text,
            None => self.answers.first().map_or("", |a| a.span.text.as_str()),
        }
    }

    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }
}

struct Stopwatch {
    started: Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self { started: Instant::now() }
    }

    fn record(self, result: &mut QueryResult, stage: &str) {
        let ms = self.started.elapsed().as_secs_f64() * 1000.0;
        result.timing.get_or_insert_with(BTreeMap::new).insert(stage.to_string(), ms);
    }
}

pub fn build_reader(config: &PipelineConfig) -> Result<Box<dyn Reader>, PipelineError> {
    let endpoint = || {
        config
            .reader
            .endpoint
            .as_deref()
            .ok_or_else(|| PipelineError::Config("reader.endpoint is not set".into()))
    };
    Ok(match config.reader.kind {
        ReaderKind::Baseline => Box::new(BaselineReader {
            window: config.reader.window,
            top_k: config.reader.top_k,
        }),
        ReaderKind::ExternalExtractive => Box::new(ExtractiveClient::new(
            endpoint()?,
            config.reader.http(),
            config.reader.top_k,
        )?),
        ReaderKind::ExternalGenerative => Box::new(GenerativeClient::new(endpoint()?, config.reader.http())?),
    })
}

pub fn build_provider(config: &PipelineConfig, bundle: &IndexBundle) -> Result<Box<dyn EmbeddingProvider>, PipelineError> {
    Ok(match config.provider.kind {
        ProviderKind::BuiltinTfidf => Box::new(TfidfProvider::new(Arc::clone(&bundle.tfidf))),
        ProviderKind::External => {
            let url = config
                .provider
                .endpoint
                .as_deref()
                .ok_or_else(|| PipelineError::Config("provider.endpoint is not set".into()))?;
            Box::new(
                HttpEmbeddingProvider::new(url, config.provider.http())
                    .map_err(|e| PipelineError::Retrieval(crate::retrieval::ProviderError::from(e).into()))?,
            )
        }
    })
}

/// A loaded bundle together with the clients a config asks for.
pub struct Engine {
    bundle: Arc<IndexBundle>,
    config: PipelineConfig,
    provider: Box<dyn EmbeddingProvider>,
    reader: Box<dyn Reader>,
}

impl Engine {
    pub fn new(bundle: Arc<IndexBundle>, config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        if config.pipeline == PipelineKind::LdaFilter && bundle.topics.is_none() {
            return Err(PipelineError::Config(
                "lda-filter pipeline needs a bundle built with a topic model".into(),
            ));
        }
        let provider = build_provider(&config, &bundle)?;
        let reader = build_reader(&config)?;
        Ok(Self { bundle, config, provider, reader })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn bundle(&self) -> &IndexBundle {
        &self.bundle
    }

    pub fn reader(&self) -> &dyn Reader {
        self.reader.as_ref()
    }

    pub fn answer_question(&self, question: &str, top_n: Option<usize>) -> Result<QueryResult, PipelineError> {
        let top_n = top_n.unwrap_or(self.config.top_n);
        if top_n == 0 {
            return Err(PipelineError::Config("top_n must be at least 1".into()));
        }
        let mut result = QueryResult::empty(question);

        if self.reader.is_generative() {
            let watch = Stopwatch::start();
            let generated = match self.reader.answer(question, None)? {
                ReaderOutput::Generated(g) => g,
                ReaderOutput::Spans(_) => unreachable!("generative reader returned spans"),
            };
            watch.record(&mut result, "generate");
            result.generated = Some(generated);
            return Ok(result);
        }

        let hits = match self.config.pipeline {
            PipelineKind::KeywordCosine => self.keyword_cosine_hits(question, top_n, &mut result)?,
            PipelineKind::LdaFilter => self.topic_hits(question, top_n, &mut result)?,
        };
        if hits.is_empty() {
            result.diagnostics.push(DIAG_FILTER_ELIMINATED_ALL.to_string());
            return Ok(result);
        }

        let watch = Stopwatch::start();
        let contexts: Vec<String> = hits
            .iter()
            .map(|h| self.bundle.article(&h.article_id).expect("hit comes from bundle").full_text())
            .collect();
        let outputs = bounded_map(&contexts, self.config.reader.concurrency, |c| {
            self.reader.answer(question, Some(c))
        });

        let mut first_error: Option<ReaderError> = None;
        let mut failures = 0;
        let mut ranked: Vec<(usize, ArticleAnswer)> = Vec::new();
        for ((hit, context), output) in hits.iter().zip(contexts).zip(outputs) {
            match output {
                Ok(ReaderOutput::Spans(spans)) => {
                    if !spans.is_empty() {
                        result.contexts.insert(hit.article_id.clone(), context);
                    }
                    ranked.extend(spans.into_iter().map(|span| {
                        (hit.rank, ArticleAnswer { article_id: hit.article_id.clone(), span })
                    }));
                }
                Ok(ReaderOutput::Generated(_)) => unreachable!("extractive reader returned generated text"),
                Err(e) => {
                    failures += 1;
                    result.diagnostics.push(format!("reader failed on article {}: {e}", hit.article_id));
                    first_error.get_or_insert(e);
                }
            }
        }
        if failures == hits.len() {
            if let Some(e) = first_error.filter(|e| !matches!(e, ReaderError::EmptyContext)) {
                return Err(e.into());
            }
        }
        ranked.sort_by(|(ra, a), (rb, b)| {
            b.span
                .score
                .total_cmp(&a.span.score)
                .then(ra.cmp(rb))
                .then(a.span.char_start.cmp(&b.span.char_start))
        });
        result.answers = ranked.into_iter().map(|(_, a)| a).collect();
        result.hits = hits;
        watch.record(&mut result, "read");
        Ok(result)
    }

    fn keyword_cosine_hits(
        &self,
        question: &str,
        top_n: usize,
        result: &mut QueryResult,
    ) -> Result<Vec<RankedHit>, PipelineError> {
        let watch = Stopwatch::start();
        let candidates: Vec<Article> = if self.config.keywords.is_empty() {
            self.bundle.articles.clone()
        } else {
            let decisions = keyword_filter(&self.bundle.articles, &self.config.keywords, self.config.keyword_mode)?;
            self.bundle
                .articles
                .iter()
                .zip(decisions)
                .filter(|(_, d)| d.retained)
                .map(|(a, _)| a.clone())
                .collect()
        };
        watch.record(result, "filter");
        if candidates.is_empty() {
            return Ok(Vec::new());
        }

        let watch = Stopwatch::start();
        let hits = rank_titles(question, &candidates, self.provider.as_ref(), top_n)?;
        watch.record(result, "retrieve");
        Ok(hits)
    }

    fn topic_hits(&self, question: &str, top_n: usize, result: &mut QueryResult) -> Result<Vec<RankedHit>, PipelineError> {
        let watch = Stopwatch::start();
        let topics = self.bundle.topics.as_ref().expect("checked in Engine::new");
        let lda = &self.config.lda;

        let query_doc = TokenizedDoc::lookup("query", question, &self.bundle.vocab);
        let mut decisions: Vec<FilterDecision> =
            match infer_doc_topics(&topics.model, &query_doc, lda.fold_iterations, lda.seed) {
                Ok(theta) => topic_filter(&topics.model, &topics.doc_topics, &theta, lda.rule()?)?,
                Err(TopicError::AllOutOfVocabulary { .. }) => {
                    result.diagnostics.push("query has no in-vocabulary terms".into());
                    Vec::new()
                }
                Err(e) => return Err(e.into()),
            };

        // articles too short for the topic model keep their keyword-filter status
        let excluded = &self.bundle.manifest.lda_excluded;
        if !excluded.is_empty() && !self.config.keywords.is_empty() {
            let short: Vec<Article> = self
                .bundle
                .articles
                .iter()
                .filter(|a| excluded.contains(&a.id))
                .cloned()
                .collect();
            decisions.extend(keyword_filter(&short, &self.config.keywords, self.config.keyword_mode)?);
        }

        let mut retained: Vec<FilterDecision> = decisions.into_iter().filter(|d| d.retained).collect();
        retained.sort_by(crate::topicfilter::rank_order);
        retained.truncate(top_n);
        watch.record(result, "topic_filter");

        Ok(retained
            .into_iter()
            .enumerate()
            .map(|(i, d)| RankedHit {
                title: self
                    .bundle
                    .article(&d.article_id)
                    .map(|a| a.title.clone())
                    .unwrap_or_default(),
                article_id: d.article_id,
                score: d.score,
                rank: i + 1,
            })
            .collect())
    }
}

/// One-shot convenience over [`Engine`].
pub fn answer_question(
    bundle: Arc<IndexBundle>,
    config: &PipelineConfig,
    question: &str,
) -> Result<QueryResult, PipelineError> {
    Engine::new(bundle, config.clone())?.answer_question(question, None)
}
