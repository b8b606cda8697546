//! Blocking JSON-over-HTTP transport with per-request timeout and bounded retries,
//! shared by the remote embedding and reader clients.

use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tracing::debug;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    /// Per-attempt timeout.
    #[serde(with = "millis")]
    pub timeout: Duration,
    /// Total attempts including the first; at least 1.
    pub max_attempts: u32,
    /// Delay before the second attempt, doubled for each later one.
    #[serde(with = "millis")]
    pub backoff: Duration,
}

impl Default for HttpSettings {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            max_attempts: 3,
            backoff: Duration::from_millis(200),
        }
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("cannot build HTTP client: {0}")]
    Client(String),
    #[error("{url} unreachable after {attempts} attempt(s): {message}")]
    Unreachable {
        url: String,
        attempts: u32,
        message: String,
    },
    #[error("{url} answered HTTP {status} after {attempts} attempt(s): {body}")]
    Status {
        url: String,
        status: u16,
        attempts: u32,
        body: String,
    },
    #[error("{url} sent an undecodable body: {message}")]
    Decode { url: String, message: String },
}

impl TransportError {
    /// Whether a later call might succeed without any change on the caller's side.
    pub fn is_retryable(&self) -> bool {
        match self {
            Self::Unreachable { .. } => true,
            Self::Status { status, .. } => retryable_status(*status),
            Self::Client(_) | Self::Decode { .. } => false,
        }
    }
}

fn retryable_status(status: u16) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS.as_u16() || (500..600).contains(&status)
}

/// A service base URL plus the client used to reach it.
#[derive(Debug, Clone)]
pub struct JsonEndpoint {
    base_url: String,
    client: Client,
    settings: HttpSettings,
}

impl JsonEndpoint {
    pub fn new(base_url: &str, settings: HttpSettings) -> Result<Self, TransportError> {
        let client = Client::builder()
            .timeout(settings.timeout)
            .build()
            .map_err(|e| TransportError::Client(e.to_string()))?;
        Ok(Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            client,
            settings,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn post<Req, Resp>(&self, path: &str, body: &Req) -> Result<Resp, TransportError>
    where
        Req: Serialize + ?Sized,
        Resp: DeserializeOwned,
    {
        let url = format!("{}{}", self.base_url, path);
        let attempts = self.settings.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            attempt += 1;
            let failure = match self.client.post(&url).json(body).send() {
                Ok(resp) if resp.status().is_success() => {
                    let bytes = resp.bytes().map_err(|e| TransportError::Unreachable {
                        url: url.clone(),
                        attempts: attempt,
                        message: e.to_string(),
                    })?;
                    return serde_json::from_slice(&bytes).map_err(|e| TransportError::Decode {
                        url: url.clone(),
                        message: e.to_string(),
                    });
                }
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    let body = resp.text().unwrap_or_default();
                    let err = TransportError::Status {
                        url: url.clone(),
                        status,
                        attempts: attempt,
                        body,
                    };
                    if !retryable_status(status) {
                        return Err(err);
                    }
                    err
                }
                Err(e) => TransportError::Unreachable {
                    url: url.clone(),
                    attempts: attempt,
                    message: e.to_string(),
                },
            };
            if attempt >= attempts {
                return Err(failure);
            }
            debug!(%url, attempt, error = %failure, "retrying request");
            thread::sleep(self.settings.backoff * 2u32.saturating_pow(attempt - 1));
        }
    }
}
