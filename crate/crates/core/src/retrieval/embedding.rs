use crate::http::TransportError;

use super::RetrievalError;

/// A fixed-length real vector, stored densely or as sorted `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    dim: usize,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse(Vec<(usize, f64)>),
}

impl EmbeddingVector {
    pub fn dense(values: Vec<f64>) -> Self {
        Self {
            dim: values.len(),
            storage: Storage::Dense(values),
        }
    }

    /// Builds a sparse vector; `entries` must have strictly increasing indices below `dim`.
    pub fn sparse(dim: usize, entries: Vec<(usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.last().is_none_or(|e| e.0 < dim));
        Self {
            dim,
            storage: Storage::Sparse(entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_finite(&self) -> bool {
        match &self.storage {
            Storage::Dense(v) => v.iter().all(|x| x.is_finite()),
            Storage::Sparse(e) => e.iter().all(|(_, x)| x.is_finite()),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse(entries) => {
                let mut v = vec![0.0; self.dim];
                for &(i, x) in entries {
                    v[i] = x;
                }
                v
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|x| x * factor).collect()),
            Storage::Sparse(e) => Storage::Sparse(e.iter().map(|&(i, x)| (i, x * factor)).collect()),
        };
        Self { dim: self.dim, storage }
    }

    fn squared_norm(&self) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v.iter().map(|x| x * x).sum(),
            Storage::Sparse(e) => e.iter().map(|(_, x)| x * x).sum(),
        }
    }

    fn dot(&self, other: &Self) -> f64 {
        use Storage::*;
        match (&self.storage, &other.storage) {
            (Dense(a), Dense(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            (Sparse(a), Dense(b)) | (Dense(b), Sparse(a)) => a.iter().map(|&(i, x)| x * b[i]).sum(),
            (Sparse(a), Sparse(b)) => {
                let (mut i, mut j, mut sum) = (0, 0, 0.0);
                while i < a.len() && j < b.len() {
                    match a[i].0.cmp(&b[j].0) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            sum += a[i].1 * b[j].1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
                sum
            }
        }
    }
}

/// Cosine similarity. Zero-norm inputs give 0.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, RetrievalError> {
    if a.dim != b.dim {
        return Err(RetrievalError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let norms = a.squared_norm() * b.squared_norm();
    if norms == 0.0 {
        return Ok(0.0);
    }
    // sqrt(|a|^2 |b|^2) rather than |a| |b| so that cosine(a, a) is exactly 1
    Ok((a.dot(b) / norms.sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("embedding protocol violation: {0}")]
    Protocol(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Transport(t) if t.is_retryable())
    }
}

/// Maps texts to embeddings: one vector per input, all of the same dimension.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, ProviderError>;
}
