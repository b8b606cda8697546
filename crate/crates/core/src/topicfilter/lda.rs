//! Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.
//!
//! The sampler scans tokens in document order and resamples each topic assignment
//! from
//!
//! ```text
//! P(z = k | rest) ∝ (n_dk + α) (n_kw + β) / (n_k + V β)
//! ```
//!
//! with the token's own assignment removed from the counts. All randomness comes
//! from a ChaCha8 stream seeded from the configured `u64` seed, and each draw
//! consumes exactly one `f64` from the stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::corpus::{TokenizedDoc, Vocabulary};

/// Name recorded in model metadata for the generator used by the sampler.
pub const RNG_ALGORITHM: &str = "chacha8-u64seed-f64draw";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaParams {
    /// Heuristic priors `α = 50/K`, `β = 0.01` for `topics` topics.
    pub fn with_topics(topics: usize) -> Self {
        Self {
            topics,
            alpha: 50.0 / topics as f64,
            beta: 0.01,
            iterations: 500,
            seed: 42,
        }
    }

    fn validate(&self) -> Result<(), TopicError> {
        if self.topics < 2 {
            return Err(TopicError::InvalidParameter(format!(
                "need at least 2 topics, got {}",
                self.topics
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(TopicError::InvalidParameter(format!("alpha {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(TopicError::InvalidParameter(format!("beta {}", self.beta)));
        }
        if self.iterations == 0 {
            return Err(TopicError::InvalidParameter("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for LdaParams {
    fn default() -> Self {
        Self::with_topics(20)
    }
}

/// Fitted topic-word distributions plus the settings that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub topics: usize,
    pub vocab_size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub rng: String,
    pub vocab_hash: String,
    /// Row-major `topics x vocab_size`.
    pub phi: Vec<f64>,
}

impl TopicModel {
    /// A model whose topics are all uniform over the vocabulary.
    pub fn uniform(topics: usize, vocab_size: usize, alpha: f64, beta: f64) -> Self {
        Self {
            topics,
            vocab_size,
            alpha,
            beta,
            seed: 0,
            iterations: 0,
            rng: RNG_ALGORITHM.to_string(),
            vocab_hash: String::new(),
            phi: vec![1.0 / vocab_size as f64; topics * vocab_size],
        }
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        &self.phi[topic * self.vocab_size..(topic + 1) * self.vocab_size]
    }

    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        self.phi[topic * self.vocab_size + word]
    }
}

/// Count tables of the collapsed sampler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GibbsState {
    topics: usize,
    vocab_size: usize,
    /// Topic of every token, per document.
    pub z: Vec<Vec<usize>>,
    /// `D x K`, row-major.
    pub doc_topic: Vec<u32>,
    /// `K x V`, row-major.
    pub topic_word: Vec<u32>,
    pub topic_totals: Vec<u32>,
}

impl GibbsState {
    fn from_assignments(docs: &[Vec<usize>], z: Vec<Vec<usize>>, topics: usize, vocab_size: usize) -> Self {
        let mut state = Self {
            topics,
            vocab_size,
            z: Vec::new(),
            doc_topic: vec![0; docs.len() * topics],
            topic_word: vec![0; topics * vocab_size],
            topic_totals: vec![0; topics],
        };
        for (d, (words, topics_of)) in docs.iter().zip(&z).enumerate() {
            for (&w, &k) in words.iter().zip(topics_of) {
                state.add(d, w, k);
            }
        }
        state.z = z;
        state
    }

    fn add(&mut self, d: usize, w: usize, k: usize) {
        self.doc_topic[d * self.topics + k] += 1;
        self.topic_word[k * self.vocab_size + w] += 1;
        self.topic_totals[k] += 1;
    }

    fn remove(&mut self, d: usize, w: usize, k: usize) {
        self.doc_topic[d * self.topics + k] -= 1;
        self.topic_word[k * self.vocab_size + w] -= 1;
        self.topic_totals[k] -= 1;
    }

    pub fn doc_topic_row(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.topics..(d + 1) * self.topics]
    }

    /// True when tallying `z` from scratch reproduces every count table.
    pub fn recount_matches(&self, docs: &[Vec<usize>]) -> bool {
        let fresh = Self::from_assignments(docs, self.z.clone(), self.topics, self.vocab_size);
        fresh == *self
    }
}

pub struct LdaSampler {
    params: LdaParams,
    vocab_size: usize,
    doc_ids: Vec<String>,
    docs: Vec<Vec<usize>>,
    state: GibbsState,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
    sweeps: usize,
}

impl LdaSampler {
    /// Validates the input and draws a uniformly random initial assignment.
    pub fn new(docs: &[TokenizedDoc], vocab_size: usize, params: LdaParams) -> Result<Self, TopicError> {
        params.validate()?;
        if docs.is_empty() {
            return Err(TopicError::NoDocuments);
        }
        for doc in docs {
            if doc.is_empty() {
                return Err(TopicError::EmptyDocument {
                    article_id: doc.article_id.clone(),
                });
            }
            if let Some(&token) = doc.tokens.iter().find(|&&t| t >= vocab_size) {
                return Err(TopicError::TokenOutOfRange {
                    article_id: doc.article_id.clone(),
                    token,
                    vocab_size,
                });
            }
        }

        let k = params.topics;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let token_lists: Vec<Vec<usize>> = docs.iter().map(|d| d.tokens.clone()).collect();
        let z = token_lists
            .iter()
            .map(|words| {
                words
                    .iter()
                    .map(|_| ((rng.random::<f64>() * k as f64) as usize).min(k - 1))
                    .collect()
            })
            .collect();
        let state = GibbsState::from_assignments(&token_lists, z, k, vocab_size);

        Ok(Self {
            params,
            vocab_size,
            doc_ids: docs.iter().map(|d| d.article_id.clone()).collect(),
            docs: token_lists,
            state,
            rng,
            weights: vec![0.0; k],
            sweeps: 0,
        })
    }

    /// Resamples every token once.
    pub fn sweep(&mut self) {
        let k_count = self.params.topics;
        let alpha = self.params.alpha;
        let beta = self.params.beta;
        let v_beta = self.vocab_size as f64 * beta;

        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.state.z[d][i];
                self.state.remove(d, w, old);

                let mut total = 0.0;
                for k in 0..k_count {
                    let n_dk = self.state.doc_topic[d * k_count + k] as f64;
                    let n_kw = self.state.topic_word[k * self.vocab_size + w] as f64;
                    let n_k = self.state.topic_totals[k] as f64;
                    total += (n_dk + alpha) * (n_kw + beta) / (n_k + v_beta);
                    self.weights[k] = total;
                }
                let new = sample_cumulative(&self.weights, self.rng.random::<f64>() * total);

                self.state.z[d][i] = new;
                self.state.add(d, w, new);
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps
    }

    pub fn state(&self) -> &GibbsState {
        &self.state
    }

    pub fn documents(&self) -> &[Vec<usize>] {
        &self.docs
    }

    /// Runs sweeps until the configured iteration count is reached.
    pub fn run(&mut self) {
        while self.sweeps < self.params.iterations {
            self.sweep();
        }
    }

    /// Per-document topic mixtures `(n_dk + α) / (N_d + K α)` from the current state.
    pub fn doc_topics(&self) -> Vec<(String, Vec<f64>)> {
        let k = self.params.topics;
        let alpha = self.params.alpha;
        self.doc_ids
            .iter()
            .enumerate()
            .map(|(d, id)| {
                let n_d = self.docs[d].len() as f64;
                let theta = self
                    .state
                    .doc_topic_row(d)
                    .iter()
                    .map(|&c| (c as f64 + alpha) / (n_d + k as f64 * alpha))
                    .collect();
                (id.clone(), theta)
            })
            .collect()
    }

    /// Topic-word distributions `(n_kw + β) / (n_k + V β)` from the current state.
    pub fn model(&self, vocab_hash: impl Into<String>) -> TopicModel {
        let v = self.vocab_size;
        let beta = self.params.beta;
        let mut phi = Vec::with_capacity(self.params.topics * v);
        for k in 0..self.params.topics {
            let denom = self.state.topic_totals[k] as f64 + v as f64 * beta;
            phi.extend(
                self.state.topic_word[k * v..(k + 1) * v]
                    .iter()
                    .map(|&c| (c as f64 + beta) / denom),
            );
        }
        TopicModel {
            topics: self.params.topics,
            vocab_size: v,
            alpha: self.params.alpha,
            beta,
            seed: self.params.seed,
            iterations: self.sweeps,
            rng: RNG_ALGORITHM.to_string(),
            vocab_hash: vocab_hash.into(),
            phi,
        }
    }
}

/// Index of the first cumulative weight strictly above `u`.
fn sample_cumulative(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

pub fn fit_lda(docs: &[TokenizedDoc], vocab: &Vocabulary, params: LdaParams) -> Result<TopicModel, TopicError> {
    let mut sampler = LdaSampler::new(docs, vocab.len(), params)?;
    sampler.run();
    Ok(sampler.model(vocab.content_hash()))
}

/// Estimates a document's topic mixture by Gibbs fold-in with `phi` held fixed.
///
/// Tokens with indices outside the model vocabulary are dropped first.
pub fn infer_doc_topics(
    model: &TopicModel,
    doc: &TokenizedDoc,
    fold_iterations: usize,
    seed: u64,
) -> Result<Vec<f64>, TopicError> {
    if fold_iterations == 0 {
        return Err(TopicError::InvalidParameter("fold iterations must be >= 1".into()));
    }
    let words: Vec<usize> = doc
        .tokens
        .iter()
        .copied()
        .filter(|&w| w < model.vocab_size)
        .collect();
    if words.is_empty() {
        return Err(TopicError::AllOutOfVocabulary {
            article_id: doc.article_id.clone(),
        });
    }

    let k_count = model.topics;
    let alpha = model.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u32; k_count];
    let mut z: Vec<usize> = words
        .iter()
        .map(|_| ((rng.random::<f64>() * k_count as f64) as usize).min(k_count - 1))
        .collect();
    for &k in &z {
        counts[k] += 1;
    }

    let mut weights = vec![0.0; k_count];
    for _ in 0..fold_iterations {
        for (i, &w) in words.iter().enumerate() {
            counts[z[i]] -= 1;
            let mut total = 0.0;
            for k in 0..k_count {
                total += (counts[k] as f64 + alpha) * model.phi(k, w);
                weights[k] = total;
            }
            let new = sample_cumulative(&weights, rng.random::<f64>() * total);
            z[i] = new;
            counts[new] += 1;
        }
    }

    let denom = words.len() as f64 + k_count as f64 * alpha;
    Ok(counts.iter().map(|&c| (c as f64 + alpha) / denom).collect())
}
