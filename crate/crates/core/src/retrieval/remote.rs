use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{EmbeddingProvider, EmbeddingVector, ProviderError};
use crate::http::{HttpSettings, JsonEndpoint, TransportError};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Client for a remote sentence-embedding service (`POST /embed`).
///
/// The service decides the dimension; the client only checks that every vector of a
/// session has that same dimension and finite entries.
#[derive(Debug)]
pub struct HttpEmbeddingProvider {
    endpoint: JsonEndpoint,
    session_dim: OnceLock<usize>,
}

impl HttpEmbeddingProvider {
    pub fn new(base_url: &str, settings: HttpSettings) -> Result<Self, TransportError> {
        Ok(Self {
            endpoint: JsonEndpoint::new(base_url, settings)?,
            session_dim: OnceLock::new(),
        })
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn name(&self) -> &str {
        self.endpoint.base_url()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let resp: EmbedResponse = self.endpoint.post("/embed", &EmbedRequest { texts })?;
        if resp.vectors.len() != texts.len() {
            return Err(ProviderError::Protocol(format!(
                "sent {} texts, received {} vectors",
                texts.len(),
                resp.vectors.len()
            )));
        }
        let dim = resp.vectors[0].len();
        if dim == 0 {
            return Err(ProviderError::Protocol("zero-length vector".into()));
        }
        if let Some((i, v)) = resp.vectors.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(ProviderError::Protocol(format!(
                "ragged vectors: vector 0 has dim {dim}, vector {i} has dim {}",
                v.len()
            )));
        }
        let session = *self.session_dim.get_or_init(|| dim);
        if session != dim {
            return Err(ProviderError::Protocol(format!(
                "dimension changed within session: {session} then {dim}"
            )));
        }
        let vectors: Vec<EmbeddingVector> = resp.vectors.into_iter().map(EmbeddingVector::dense).collect();
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(ProviderError::Protocol("non-finite vector entry".into()));
        }
        Ok(vectors)
    }
}
