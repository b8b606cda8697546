use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{EmbeddingProvider, EmbeddingVector, ProviderError};
use crate::corpus::{terms, TokenizedDoc, Vocabulary};

/// Frozen vocabulary and smoothed idf weights: `idf(t) = ln((1 + D) / (1 + df(t))) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexRepr")]
pub struct TfidfIndex {
    vocab: Vocabulary,
    idf: Vec<f64>,
}

#[derive(Deserialize)]
struct IndexRepr {
    vocab: Vocabulary,
    idf: Vec<f64>,
}

impl TryFrom<IndexRepr> for TfidfIndex {
    type Error = String;

    fn try_from(repr: IndexRepr) -> Result<Self, String> {
        if repr.vocab.len() != repr.idf.len() {
            return Err(format!(
                "vocab has {} terms but idf has {} weights",
                repr.vocab.len(),
                repr.idf.len()
            ));
        }
        Ok(Self {
            vocab: repr.vocab,
            idf: repr.idf,
        })
    }
}

impl TfidfIndex {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocab.index_of(term).map(|i| self.idf[i])
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }
}

/// Computes document frequencies of every vocabulary term over `docs`.
pub fn tfidf_fit(docs: &[TokenizedDoc], vocab: &Vocabulary) -> TfidfIndex {
    let mut df = vec![0usize; vocab.len()];
    let mut last_seen = vec![usize::MAX; vocab.len()];
    for (d, doc) in docs.iter().enumerate() {
        for &t in &doc.tokens {
            if last_seen[t] != d {
                last_seen[t] = d;
                df[t] += 1;
            }
        }
    }
    let n_docs = docs.len() as f64;
    TfidfIndex {
        vocab: vocab.clone(),
        idf: df
            .iter()
            .map(|&f| ((1.0 + n_docs) / (1.0 + f as f64)).ln() + 1.0)
            .collect(),
    }
}

/// Raw-count tf times idf over the index vocabulary, L2-normalized. Unknown terms
/// are ignored; text with no known terms maps to the zero vector.
pub fn tfidf_embed(index: &TfidfIndex, text: &str) -> EmbeddingVector {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for term in terms(text) {
        if let Some(i) = index.vocab.index_of(&term) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(i, tf)| (i, tf * index.idf[i]))
        .collect();
    let norm = entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, x) in &mut entries {
            *x /= norm;
        }
    }
    EmbeddingVector::sparse(index.dim(), entries)
}

/// The built-in deterministic embedding provider.
#[derive(Debug, Clone)]
pub struct TfidfProvider {
    index: Arc<TfidfIndex>,
}

impl TfidfProvider {
    pub fn new(index: Arc<TfidfIndex>) -> Self {
        Self { index }
    }
}

impl EmbeddingProvider for TfidfProvider {
    fn name(&self) -> &str {
        "builtin-tfidf"
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        Ok(texts.iter().map(|t| tfidf_embed(&self.index, t)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::cosine;

    fn fit(texts: &[&str]) -> TfidfIndex {
        let mut vocab = Vocabulary::new();
        let docs: Vec<TokenizedDoc> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| TokenizedDoc::build(i.to_string(), t, &mut vocab))
            .collect();
        tfidf_fit(&docs, &vocab)
    }

    #[test]
    fn idf_values() {
        let index = fit(&["virus spread", "virus masks"]);
        assert_eq!(index.idf("virus"), Some(1.0));
        let expected = (3.0f64 / 2.0).ln() + 1.0;
        assert_eq!(index.idf("masks"), Some(expected));
        assert!((expected - 1.4055).abs() < 1e-4);
    }

    #[test]
    fn empty_doc_counts_toward_d() {
        let index = fit(&["virus", ""]);
        assert_eq!(index.idf("virus"), Some((3.0f64 / 2.0).ln() + 1.0));
    }

    #[test]
    fn embedding_properties() {
        let index = fit(&["incubation period of the virus", "masks reduce spread"]);
        let a = tfidf_embed(&index, "incubation period of the virus");
        assert_eq!(cosine(&a, &a).unwrap(), 1.0);

        let oov = tfidf_embed(&index, "zebra quantum");
        assert!(oov.to_dense().iter().all(|&x| x == 0.0));

        let b = tfidf_embed(&index, "masks spread");
        assert_eq!(cosine(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn raw_counts_weight_terms() {
        let index = fit(&["a b", "a c"]);
        let v = tfidf_embed(&index, "b b a").to_dense();
        let idf_b = (3.0f64 / 2.0).ln() + 1.0;
        let (wa, wb) = (1.0, 2.0 * idf_b);
        let norm = (wa * wa + wb * wb).sqrt();
        assert!((v[0] - wa / norm).abs() < 1e-15);
        assert!((v[1] - wb / norm).abs() < 1e-15);
        assert_eq!(v[2], 0.0);
    }

    #[test]
    fn deterministic_and_persisted_shape() {
        let index = fit(&["virus spread"]);
        let a = tfidf_embed(&index, "virus");
        let b = tfidf_embed(&index, "virus");
        assert_eq!(a, b);

        let json = serde_json::to_value(&index).unwrap();
        assert_eq!(json["vocab"], serde_json::json!(["virus", "spread"]));
        assert_eq!(json["idf"].as_array().unwrap().len(), 2);
        let back: TfidfIndex = serde_json::from_value(json).unwrap();
        assert_eq!(back, index);

        let bad = serde_json::json!({"vocab": ["a"], "idf": []});
        assert!(serde_json::from_value::<TfidfIndex>(bad).is_err());
    }
}
