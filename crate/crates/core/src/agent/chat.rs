//! Chat-completion client: endpoint settings, pluggable transports and
//! bounded retry with exponential backoff.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

/// Sampling temperature used when none is configured.
pub const DEFAULT_TEMPERATURE: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
    pub max_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
            multiplier: 2.0,
            max_backoff: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// No sleeping between attempts; for tests and mock endpoints.
    pub fn immediate(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            initial_backoff: Duration::ZERO,
            multiplier: 1.0,
            max_backoff: Duration::ZERO,
        }
    }

    /// Delay before attempt `attempt + 1`, where `attempt` counts from 1.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = self.multiplier.powi(attempt.saturating_sub(1) as i32);
        self.initial_backoff.mul_f64(factor).min(self.max_backoff)
    }
}

/// Where and how to reach a chat model.
#[derive(Clone, PartialEq)]
pub struct ChatEndpoint {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl Default for ChatEndpoint {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8000/v1".into(),
            model: "default".into(),
            api_key: None,
            temperature: DEFAULT_TEMPERATURE,
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
        }
    }
}

impl ChatEndpoint {
    pub fn identity(&self) -> String {
        format!("{} ({})", self.base_url, self.model)
    }
}

impl fmt::Debug for ChatEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChatEndpoint")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("temperature", &self.temperature)
            .field("timeout", &self.timeout)
            .field("retry", &self.retry)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn wire_body(&self) -> serde_json::Value {
        json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": self.system},
                {"role": "user", "content": self.user},
            ],
            "temperature": self.temperature,
        })
    }
}

/// One failed exchange, classified for the retry loop.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct TransportError {
    pub transient: bool,
    pub message: String,
}

impl TransportError {
    pub fn transient(message: impl Into<String>) -> Self {
        Self { transient: true, message: message.into() }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        Self { transient: false, message: message.into() }
    }
}

/// Failure after the retry budget is spent (or on a non-retryable error).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("endpoint {endpoint} failed after {attempts} attempt(s): {message}")]
pub struct EndpointError {
    pub endpoint: String,
    pub attempts: u32,
    pub message: String,
}

/// Sends one chat request and returns the assistant text.
pub trait ChatTransport: Send + Sync {
    fn send(&self, endpoint: &ChatEndpoint, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Two-message chat with bounded retries on transient failures.
pub fn chat_complete(
    transport: &dyn ChatTransport,
    endpoint: &ChatEndpoint,
    system: &str,
    user: &str,
) -> Result<String, EndpointError> {
    let request = ChatRequest {
        model: endpoint.model.clone(),
        system: system.to_string(),
        user: user.to_string(),
        temperature: endpoint.temperature,
    };
    let max_attempts = endpoint.retry.max_attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        match transport.send(endpoint, &request) {
            Ok(text) => return Ok(text),
            Err(e) if e.transient && attempt < max_attempts => {
                tracing::warn!(endpoint = %endpoint.identity(), attempt, error = %e, "retrying chat request");
                std::thread::sleep(endpoint.retry.backoff(attempt));
            }
            Err(e) => {
                return Err(EndpointError {
                    endpoint: endpoint.identity(),
                    attempts: attempt,
                    message: e.message,
                })
            }
        }
    }
}

/// OpenAI-compatible `POST {base_url}/chat/completions`.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpTransport;

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

/// Extracts the first choice's message content from a response body.
pub fn parse_completion_body(body: &str) -> Result<String, TransportError> {
    let parsed: CompletionResponse = serde_json::from_str(body)
        .map_err(|e| TransportError::fatal(format!("malformed completion response: {e}")))?;
    parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| TransportError::fatal("completion response has no message content"))
}

fn status_is_transient(status: u16) -> bool {
    matches!(status, 408 | 409 | 429) || status >= 500
}

impl ChatTransport for HttpTransport {
    fn send(&self, endpoint: &ChatEndpoint, request: &ChatRequest) -> Result<String, TransportError> {
        let url = format!("{}/chat/completions", endpoint.base_url.trim_end_matches('/'));
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(endpoint.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut call = agent.post(&url).header("Content-Type", "application/json");
        if let Some(key) = &endpoint.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send(request.wire_body().to_string())
            .map_err(|e| TransportError::transient(format!("request to {url} failed: {e}")))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::transient(format!("reading response body failed: {e}")))?;
        if !(200..300).contains(&status) {
            let snippet: String = body.chars().take(200).collect();
            let message = format!("HTTP {status}: {snippet}");
            return Err(if status_is_transient(status) {
                TransportError::transient(message)
            } else {
                TransportError::fatal(message)
            });
        }
        parse_completion_body(&body)
    }
}

/// Replays a fixed queue of replies in call order; test double.
///
/// Once the queue is drained, `exhausted` is returned for every call.
pub struct ScriptedTransport {
    queue: Mutex<VecDeque<Result<String, TransportError>>>,
    exhausted: Result<String, TransportError>,
    requests: Mutex<Vec<ChatRequest>>,
}

impl ScriptedTransport {
    pub fn new(replies: Vec<Result<String, TransportError>>) -> Self {
        Self {
            queue: Mutex::new(replies.into()),
            exhausted: Err(TransportError::fatal("scripted replies exhausted")),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn from_texts<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Self {
        Self::new(texts.into_iter().map(|t| Ok(t.into())).collect())
    }

    /// Returns `reply` forever once scripted replies run out.
    pub fn then_always(mut self, reply: Result<String, TransportError>) -> Self {
        self.exhausted = reply;
        self
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().expect("lock").clone()
    }
}

impl ChatTransport for ScriptedTransport {
    fn send(&self, _endpoint: &ChatEndpoint, request: &ChatRequest) -> Result<String, TransportError> {
        self.requests.lock().expect("lock").push(request.clone());
        self.queue
            .lock()
            .expect("lock")
            .pop_front()
            .unwrap_or_else(|| self.exhausted.clone())
    }
}

/// One rule of a [`RuleTransport`]: applies when every `contains` string
/// occurs in the system or user message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    pub contains: Vec<String>,
    pub responses: Vec<String>,
}

/// Content-addressed mock endpoint: the first matching rule answers, picking
/// a response by a stable hash of the request so that replies do not depend
/// on call order or concurrency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleTransport {
    pub rules: Vec<MockRule>,
    #[serde(default)]
    pub default: Option<String>,
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RuleTransport {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl ChatTransport for RuleTransport {
    fn send(&self, _endpoint: &ChatEndpoint, request: &ChatRequest) -> Result<String, TransportError> {
        let haystack = format!("{}\n{}", request.system, request.user);
        let rule = self
            .rules
            .iter()
            .find(|r| r.contains.iter().all(|c| haystack.contains(c.as_str())));
        match rule {
            Some(rule) if !rule.responses.is_empty() => {
                let h = fnv1a(haystack.bytes());
                Ok(rule.responses[(h % rule.responses.len() as u64) as usize].clone())
            }
            _ => self
                .default
                .clone()
                .ok_or_else(|| TransportError::fatal("no mock rule matches the request")),
        }
    }
}
