//! Clients for external neural readers.

use serde::{Deserialize, Serialize};

use super::{AnswerSpan, GeneratedAnswer, Reader, ReaderError, ReaderOutput};
use crate::http::{HttpSettings, JsonEndpoint};

#[derive(Serialize)]
struct ExtractRequest<'a> {
    question: &'a str,
    context: &'a str,
    top_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSpan {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractResponse {
    pub spans: Vec<WireSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub question: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub text: String,
}

/// Start/end span reader behind `POST /extract`.
#[derive(Debug)]
pub struct ExtractiveClient {
    endpoint: JsonEndpoint,
    top_k: usize,
}

impl ExtractiveClient {
    pub fn new(base_url: &str, settings: HttpSettings, top_k: usize) -> Result<Self, ReaderError> {
        Ok(Self {
            endpoint: JsonEndpoint::new(base_url, settings)?,
            top_k,
        })
    }

    /// Sends the pair and accepts the reply only if every span reconstructs from
    /// its offsets into `context`.
    pub fn extract(&self, question: &str, context: &str) -> Result<Vec<AnswerSpan>, ReaderError> {
        let resp: ExtractResponse = self.endpoint.post(
            "/extract",
            &ExtractRequest {
                question,
                context,
                top_k: self.top_k,
            },
        )?;
        resp.spans
            .into_iter()
            .enumerate()
            .map(|(index, wire)| {
                let span = AnswerSpan {
                    text: wire.text,
                    char_start: wire.start,
                    char_end: wire.end,
                    score: wire.score,
                };
                span.validate(context)
                    .map(|_| span.clone())
                    .map_err(|detail| ReaderError::InvalidSpan {
                        index,
                        text: span.text.clone(),
                        start: span.char_start,
                        end: span.char_end,
                        detail,
                    })
            })
            .collect()
    }
}

impl Reader for ExtractiveClient {
    fn name(&self) -> &str {
        "external-extractive"
    }

    fn answer(&self, question: &str, context: Option<&str>) -> Result<ReaderOutput, ReaderError> {
        let context = context.ok_or(ReaderError::ContextRequired)?;
        self.extract(question, context).map(ReaderOutput::Spans)
    }
}

/// Closed-book generator behind `POST /generate`; only the question is sent.
#[derive(Debug)]
pub struct GenerativeClient {
    endpoint: JsonEndpoint,
}

impl GenerativeClient {
    pub fn new(base_url: &str, settings: HttpSettings) -> Result<Self, ReaderError> {
        Ok(Self {
            endpoint: JsonEndpoint::new(base_url, settings)?,
        })
    }

    pub fn generate(&self, question: &str) -> Result<GeneratedAnswer, ReaderError> {
        let resp: GenerateResponse = self.endpoint.post(
            "/generate",
            &GenerateRequest {
                question: question.to_string(),
            },
        )?;
        Ok(GeneratedAnswer::from_text(resp.text))
    }
}

impl Reader for GenerativeClient {
    fn name(&self) -> &str {
        "external-generative"
    }

    fn is_generative(&self) -> bool {
        true
    }

    fn answer(&self, question: &str, context: Option<&str>) -> Result<ReaderOutput, ReaderError> {
        if context.is_some() {
            return Err(ReaderError::ContextNotAllowed);
        }
        self.generate(question).map(ReaderOutput::Generated)
    }
}
