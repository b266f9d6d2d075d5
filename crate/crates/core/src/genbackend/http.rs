//! JSON-over-HTTP backend.
//!
//! Request body: `{"prompt", "max_new_tokens", "sampling", "top_k",
//! "repetition_penalty"}`. Response body: `{"text"}`. Transport failures,
//! HTTP 429 and 5xx responses are retried with exponential backoff.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::genbackend::{BackendError, GenerationBackend, GenerationConfig};

/// Environment variable holding the bearer token for HTTP backends.
pub const AUTH_TOKEN_ENV: &str = "FINCPT_API_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub timeout_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 3, initial_backoff_ms: 200, max_backoff_ms: 5_000, timeout_ms: 120_000 }
    }
}

impl RetryPolicy {
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry).unwrap_or(u64::MAX);
        Duration::from_millis(self.initial_backoff_ms.saturating_mul(factor).min(self.max_backoff_ms))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest<'a> {
    pub prompt: &'a str,
    pub max_new_tokens: usize,
    pub sampling: bool,
    pub top_k: usize,
    pub repetition_penalty: f64,
}

impl<'a> GenerateRequest<'a> {
    pub fn new(prompt: &'a str, config: &GenerationConfig) -> Self {
        Self {
            prompt,
            max_new_tokens: config.max_new_tokens,
            sampling: config.sampling,
            top_k: config.top_k,
            repetition_penalty: config.repetition_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub text: String,
}

pub struct HttpBackend {
    identity: String,
    endpoint: String,
    auth_token: Option<String>,
    policy: RetryPolicy,
    client: reqwest::blocking::Client,
    request_counter: AtomicU64,
}

enum Attempt {
    Retryable(String),
    Fatal(BackendError),
}

impl HttpBackend {
    pub fn new(
        identity: impl Into<String>,
        endpoint: impl Into<String>,
        auth_token: Option<String>,
        policy: RetryPolicy,
    ) -> Result<Self, BackendError> {
        let identity = identity.into();
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(policy.timeout_ms))
            .build()
            .map_err(|e| BackendError::Unavailable { backend: identity.clone(), attempts: 0, reason: e.to_string() })?;
        Ok(Self { identity, endpoint: endpoint.into(), auth_token, policy, client, request_counter: AtomicU64::new(0) })
    }

    /// Reads the auth token from [`AUTH_TOKEN_ENV`] when `auth_token` is `None`.
    pub fn from_env(identity: impl Into<String>, endpoint: impl Into<String>, policy: RetryPolicy) -> Result<Self, BackendError> {
        Self::new(identity, endpoint, std::env::var(AUTH_TOKEN_ENV).ok(), policy)
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, body: &GenerateRequest<'_>, request_id: &str) -> Result<String, Attempt> {
        let mut req = self.client.post(&self.endpoint).header("x-request-id", request_id).json(body);
        if let Some(token) = &self.auth_token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| Attempt::Retryable(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Attempt::Retryable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(BackendError::Unavailable {
                backend: self.identity.clone(),
                attempts: 1,
                reason: format!("HTTP {status}"),
            }));
        }
        let bytes = resp.bytes().map_err(|e| Attempt::Retryable(e.to_string()))?;
        let parsed: GenerateResponse = serde_json::from_slice(&bytes).map_err(|e| {
            Attempt::Fatal(BackendError::Protocol { backend: self.identity.clone(), reason: e.to_string() })
        })?;
        Ok(parsed.text)
    }
}

pub fn http_generate(backend: &HttpBackend, prompt: &str, config: &GenerationConfig) -> Result<String, BackendError> {
    backend.generate(prompt, config)
}

impl GenerationBackend for HttpBackend {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn generate(&self, prompt: &str, config: &GenerationConfig) -> Result<String, BackendError> {
        config.validate()?;
        let body = GenerateRequest::new(prompt, config);
        let n = self.request_counter.fetch_add(1, Ordering::SeqCst);
        let request_id = format!("{}-{n}", self.identity);
        let mut last_reason = String::new();
        for attempt in 0..=self.policy.max_retries {
            if attempt > 0 {
                thread::sleep(self.policy.backoff(attempt - 1));
            }
            log::debug!("POST {} request_id={request_id} attempt={}", self.endpoint, attempt + 1);
            match self.attempt(&body, &request_id) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(err)) => {
                    log::warn!("request_id={request_id} failed: {err}");
                    return Err(err);
                }
                Err(Attempt::Retryable(reason)) => {
                    log::warn!("request_id={request_id} attempt {} failed: {reason}", attempt + 1);
                    last_reason = reason;
                }
            }
        }
        Err(BackendError::Unavailable {
            backend: self.identity.clone(),
            attempts: self.policy.max_retries + 1,
            reason: last_reason,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_grows_and_caps() {
        let p = RetryPolicy { initial_backoff_ms: 100, max_backoff_ms: 350, ..RetryPolicy::default() };
        assert_eq!(p.backoff(0), Duration::from_millis(100));
        assert_eq!(p.backoff(1), Duration::from_millis(200));
        assert_eq!(p.backoff(2), Duration::from_millis(350));
        assert_eq!(p.backoff(80), Duration::from_millis(350));
    }

    #[test]
    fn request_body_fields() {
        let body = serde_json::to_value(GenerateRequest::new("hi", &GenerationConfig::default())).unwrap();
        assert_eq!(
            body,
            serde_json::json!({"prompt": "hi", "max_new_tokens": 512, "sampling": false, "top_k": 50, "repetition_penalty": 1.1})
        );
    }
}
