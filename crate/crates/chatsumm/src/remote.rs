//! JSON-over-HTTP clients for remote punctuators, sentence encoders and summarizers.

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use chatsumm_core::arms::{Arm, ArmError, ArmOutput, ArmRequest};
use chatsumm_core::embeddings::{EncoderError, SentenceEncoder, SentenceVector};
use chatsumm_core::punctuation::{PredictorError, PunctLabel, Predictor, SegmentBatch};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemoteError {
    #[error("invalid endpoint `{0}`")]
    InvalidEndpoint(String),
    /// No answer within the time budget, including an unreachable host.
    #[error("no response from {url} after {attempts} attempt(s): {detail}")]
    Timeout { url: String, attempts: u32, detail: String },
    #[error("status {status}: {body}")]
    Protocol { status: u16, body: String },
}

const EXCERPT: usize = 200;

fn excerpt(s: &str) -> String {
    s.chars().take(EXCERPT).collect()
}

/// Base URL plus timeout and retry policy shared by all clients.
#[derive(Debug, Clone)]
pub struct Endpoint {
    base: String,
    pub timeout: Duration,
    /// Extra attempts after the first on timeouts, transport errors, 429 and 5xx.
    pub retries: u32,
    pub backoff: Duration,
    agent: ureq::Agent,
}

impl Endpoint {
    pub fn new(base: &str, timeout: Duration, retries: u32) -> Result<Self, RemoteError> {
        let trimmed = base.trim_end_matches('/');
        let host = trimmed
            .strip_prefix("http://")
            .or_else(|| trimmed.strip_prefix("https://"))
            .unwrap_or("");
        if host.is_empty() || host.contains(char::is_whitespace) {
            return Err(RemoteError::InvalidEndpoint(base.to_string()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            base: trimmed.to_string(),
            timeout,
            retries,
            backoff: Duration::from_millis(25),
            agent,
        })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    /// POSTs `body` as JSON and decodes a 2xx JSON answer.
    pub fn post_json<Q: Serialize, R: DeserializeOwned>(&self, path: &str, body: &Q) -> Result<R, RemoteError> {
        let url = self.url(path);
        let payload = serde_json::to_vec(body).expect("request bodies serialize");
        let mut attempts = 0;
        loop {
            attempts += 1;
            let retry = |detail: String| RemoteError::Timeout {
                url: url.clone(),
                attempts,
                detail,
            };
            let outcome = match self
                .agent
                .post(&url)
                .header("content-type", "application/json")
                .send(&payload[..])
            {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    let text = resp.body_mut().read_to_string().unwrap_or_default();
                    if (200..300).contains(&status) {
                        return serde_json::from_str(&text).map_err(|e| RemoteError::Protocol {
                            status,
                            body: excerpt(&format!("{e}: {text}")),
                        });
                    }
                    let err = RemoteError::Protocol {
                        status,
                        body: excerpt(&text),
                    };
                    if status == 429 || status >= 500 {
                        err
                    } else {
                        return Err(err);
                    }
                }
                Err(e) => retry(e.to_string()),
            };
            if attempts > self.retries {
                return Err(outcome);
            }
            thread::sleep(self.backoff * attempts);
        }
    }
}

#[derive(Serialize)]
struct PunctuateRequest<'a> {
    tokens: Vec<&'a str>,
}

#[derive(Deserialize)]
struct PunctuateResponse {
    labels: Vec<String>,
}

/// Punctuation predictor behind `POST /v1/punctuate`. Calls are serialized per instance.
#[derive(Debug)]
pub struct RemotePredictor {
    endpoint: Endpoint,
    single_flight: Mutex<()>,
}

impl RemotePredictor {
    pub fn new(endpoint: Endpoint) -> Self {
        Self {
            endpoint,
            single_flight: Mutex::new(()),
        }
    }
}

fn predictor_error(e: RemoteError) -> PredictorError {
    match e {
        RemoteError::Timeout { .. } => PredictorError::Timeout,
        RemoteError::Protocol { status, body } => PredictorError::Protocol { status, body },
        RemoteError::InvalidEndpoint(s) => PredictorError::Failed(s),
    }
}

impl Predictor for RemotePredictor {
    fn predict(&self, batch: &SegmentBatch<'_>) -> Result<Vec<Vec<PunctLabel>>, PredictorError> {
        let _guard = self.single_flight.lock().unwrap_or_else(|p| p.into_inner());
        batch
            .segments
            .iter()
            .map(|seg| {
                let req = PunctuateRequest {
                    tokens: batch.tokens(seg),
                };
                let resp: PunctuateResponse = self
                    .endpoint
                    .post_json("/v1/punctuate", &req)
                    .map_err(predictor_error)?;
                resp.labels
                    .iter()
                    .map(|l| {
                        PunctLabel::parse(l).ok_or_else(|| PredictorError::Protocol {
                            status: 200,
                            body: excerpt(&format!("unknown label `{l}`")),
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Counting semaphore capping in-flight requests.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut free = self.free.lock().unwrap_or_else(|p| p.into_inner());
            while *free == 0 {
                free = self.cv.wait(free).unwrap_or_else(|p| p.into_inner());
            }
            *free -= 1;
        }
        let out = f();
        *self.free.lock().unwrap_or_else(|p| p.into_inner()) += 1;
        self.cv.notify_one();
        out
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f64>,
}

/// Sentence encoder behind `POST /v1/embed`.
#[derive(Debug)]
pub struct RemoteEncoder {
    endpoint: Endpoint,
    gate: Gate,
    provider: String,
}

impl RemoteEncoder {
    pub fn new(endpoint: Endpoint, max_in_flight: usize) -> Self {
        let provider = format!("remote:{}", endpoint.base());
        Self {
            endpoint,
            gate: Gate::new(max_in_flight),
            provider,
        }
    }
}

impl SentenceEncoder for RemoteEncoder {
    fn encode(&self, text: &str) -> Result<SentenceVector, EncoderError> {
        let resp: EmbedResponse = self
            .gate
            .run(|| self.endpoint.post_json("/v1/embed", &EmbedRequest { text }))
            .map_err(|e| match e {
                RemoteError::Timeout { .. } => EncoderError::Timeout,
                other => EncoderError::Protocol(other.to_string()),
            })?;
        Ok(SentenceVector {
            values: resp.vector,
            source_len: text.split_whitespace().count(),
        })
    }

    fn provider(&self) -> &str {
        &self.provider
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarizeRequest {
    pub id: String,
    pub text: String,
    pub channel: String,
    pub max_sentences: usize,
}

#[derive(Deserialize)]
struct SummarizeResponse {
    summary: String,
}

/// Summarizer arm behind `POST /v1/summarize`.
#[derive(Debug)]
pub struct RemoteArm {
    name: String,
    endpoint: Endpoint,
}

impl RemoteArm {
    pub fn new(name: impl Into<String>, endpoint: Endpoint) -> Self {
        Self {
            name: name.into(),
            endpoint,
        }
    }

    pub fn request_for(req: &ArmRequest<'_>) -> SummarizeRequest {
        SummarizeRequest {
            id: req.item.id.clone(),
            text: req.item.transcript.channel_text(),
            channel: req.item.channel.as_str().to_string(),
            max_sentences: req.max_sentences,
        }
    }
}

impl Arm for RemoteArm {
    fn name(&self) -> &str {
        &self.name
    }

    fn summarize(&self, req: &ArmRequest<'_>) -> Result<ArmOutput, ArmError> {
        let resp: SummarizeResponse = self
            .endpoint
            .post_json("/v1/summarize", &Self::request_for(req))
            .map_err(|e| match e {
                RemoteError::Timeout { .. } => ArmError::Timeout,
                other => ArmError::Protocol(other.to_string()),
            })?;
        Ok(ArmOutput::Text(resp.summary))
    }
}
