use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::http::HttpSettings;
use crate::reader::{DEFAULT_TOP_K, DEFAULT_WINDOW};
use crate::topicfilter::{FilterRule, KeywordMode, LdaParams};

pub const EMBED_ENDPOINT_ENV: &str = "QA_EMBED_ENDPOINT";
pub const READER_ENDPOINT_ENV: &str = "QA_READER_ENDPOINT";

/// Top-m used by the topic filter when neither a threshold nor top-m is configured.
pub const DEFAULT_TOPIC_TOP_M: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineKind {
    /// Keyword filter, then title-embedding cosine ranking.
    #[default]
    KeywordCosine,
    /// LDA topic relevance filter.
    LdaFilter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub topics: usize,
    /// Defaults to `50 / topics`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Documents with fewer tokens are left out of the fit.
    pub min_tokens: usize,
    pub fold_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_m: Option<usize>,
}

impl Default for LdaConfig {
    fn default() -> Self {
        let p = LdaParams::default();
        Self {
            topics: p.topics,
            alpha: None,
            beta: p.beta,
            iterations: p.iterations,
            seed: p.seed,
            min_tokens: 25,
            fold_iterations: 50,
            threshold: None,
            top_m: None,
        }
    }
}

impl LdaConfig {
    pub fn params(&self) -> LdaParams {
        LdaParams {
            topics: self.topics,
            alpha: self.alpha.unwrap_or(50.0 / self.topics as f64),
            beta: self.beta,
            iterations: self.iterations,
            seed: self.seed,
        }
    }

    pub fn rule(&self) -> Result<FilterRule, PipelineError> {
        match (self.threshold, self.top_m) {
            (None, None) => Ok(FilterRule::TopM(DEFAULT_TOPIC_TOP_M)),
            (t, m) => FilterRule::from_options(t, m).map_err(|e| PipelineError::Config(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReaderKind {
    #[default]
    Baseline,
    ExternalExtractive,
    ExternalGenerative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReaderConfig {
    pub kind: ReaderKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    pub window: usize,
    pub top_k: usize,
    /// Maximum requests in flight to an external reader.
    pub concurrency: usize,
    pub timeout_ms: u64,
    pub max_attempts: u32,
}

impl Default for ReaderConfig {
    fn default() -> Self {
        Self {
            kind: ReaderKind::Baseline,
            endpoint: None,
            window: DEFAULT_WINDOW,
            top_k: DEFAULT_TOP_K,
            concurrency: 4,
            timeout_ms: 30_000,
            max_attempts: 3,
        }
    }
}

impl ReaderConfig {
    pub fn http(&self) -> HttpSettings {
        HttpSettings {
            timeout: Duration::from_millis(self.timeout_ms),
            max_attempts: self.max_attempts,
            ..HttpSettings::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    #[default]
    BuiltinTfidf,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub max_attempts: u32,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::BuiltinTfidf,
            endpoint: None,
            timeout_ms: 30_000,
            max_attempts: 3,
        }
    }
}

impl ProviderConfig {
    pub fn http(&self) -> HttpSettings {
        HttpSettings {
            timeout: Duration::from_millis(self.timeout_ms),
            max_attempts: self.max_attempts,
            ..HttpSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub pipeline: PipelineKind,
    /// Empty means no keyword filtering.
    pub keywords: Vec<String>,
    pub keyword_mode: KeywordMode,
    pub top_n: usize,
    pub lda: LdaConfig,
    pub reader: ReaderConfig,
    pub provider: ProviderConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            pipeline: PipelineKind::KeywordCosine,
            keywords: Vec::new(),
            keyword_mode: KeywordMode::Any,
            top_n: 5,
            lda: LdaConfig::default(),
            reader: ReaderConfig::default(),
            provider: ProviderConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Replaces endpoints with values from `QA_EMBED_ENDPOINT` / `QA_READER_ENDPOINT`.
    pub fn apply_env_overrides(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(url) = lookup(EMBED_ENDPOINT_ENV).filter(|u| !u.is_empty()) {
            self.provider.endpoint = Some(url);
        }
        if let Some(url) = lookup(READER_ENDPOINT_ENV).filter(|u| !u.is_empty()) {
            self.reader.endpoint = Some(url);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if self.top_n == 0 {
            return fail("top_n must be at least 1".into());
        }
        if let Some(k) = self.keywords.iter().find(|k| crate::corpus::terms(k).is_empty()) {
            return fail(format!("keyword {k:?} contains no tokens"));
        }
        if self.reader.kind != ReaderKind::Baseline && self.reader.endpoint.is_none() {
            return fail("external reader selected but reader.endpoint is not set".into());
        }
        if self.reader.kind == ReaderKind::Baseline && (self.reader.window == 0 || self.reader.top_k == 0) {
            return fail("reader.window and reader.top_k must be at least 1".into());
        }
        if self.provider.kind == ProviderKind::External && self.provider.endpoint.is_none() {
            return fail("external embedding provider selected but provider.endpoint is not set".into());
        }
        if self.pipeline == PipelineKind::LdaFilter {
            let p = self.lda.params();
            if p.topics < 2 || p.alpha.is_nan() || p.alpha <= 0.0 || p.beta.is_nan() || p.beta <= 0.0 || p.iterations == 0 {
                return fail(format!("invalid LDA parameters {p:?}"));
            }
            if self.lda.fold_iterations == 0 {
                return fail("lda.fold_iterations must be at least 1".into());
            }
            self.lda.rule()?;
        }
        Ok(())
    }

    /// Short label for reports, e.g. `keyword-cosine+baseline`.
    pub fn system_name(&self) -> String {
        let reader = match self.reader.kind {
            ReaderKind::Baseline => "baseline",
            ReaderKind::ExternalExtractive => "external-extractive",
            ReaderKind::ExternalGenerative => return "external-generative".into(),
        };
        let pipeline = match self.pipeline {
            PipelineKind::KeywordCosine => "keyword-cosine",
            PipelineKind::LdaFilter => "lda-filter",
        };
        format!("{pipeline}+{reader}")
    }
}
