//! Text-generation backends shared by synthetic data generation, the
//! benchmark harness and the output comparison.

pub mod decode;
pub mod http;
pub mod mock;
pub mod reference;

use serde::{Deserialize, Serialize};

pub use decode::{apply_repetition_penalty, greedy_decode, top_k_filter, DecodeError};
pub use http::{http_generate, HttpBackend, RetryPolicy, AUTH_TOKEN_ENV};
pub use mock::MockBackend;
pub use reference::ReferenceBackend;

/// Decoding settings. Defaults are the published comparison settings:
/// 512 new tokens, no sampling, top-k 50, repetition penalty 1.1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub max_new_tokens: usize,
    pub sampling: bool,
    pub top_k: usize,
    pub repetition_penalty: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self { max_new_tokens: 512, sampling: false, top_k: 50, repetition_penalty: 1.1 }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.max_new_tokens < 1 {
            return Err(BackendError::InvalidConfig("max_new_tokens must be at least 1".into()));
        }
        if self.top_k < 1 {
            return Err(BackendError::InvalidConfig("top_k must be at least 1".into()));
        }
        if !(self.repetition_penalty > 0.0 && self.repetition_penalty.is_finite()) {
            return Err(BackendError::InvalidConfig("repetition_penalty must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("backend `{backend}` unavailable after {attempts} attempt(s): {reason}")]
    Unavailable { backend: String, attempts: u32, reason: String },
    #[error("protocol error from `{backend}`: {reason}")]
    Protocol { backend: String, reason: String },
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("generation failed: {0}")]
    Generation(String),
}

/// A text generator. With `sampling = false` the output must be a pure
/// function of `(prompt, config)`. Implementations must tolerate concurrent
/// calls.
pub trait GenerationBackend: Send + Sync {
    fn identity(&self) -> &str;
    fn generate(&self, prompt: &str, config: &GenerationConfig) -> Result<String, BackendError>;
}

impl<B: GenerationBackend + ?Sized> GenerationBackend for Box<B> {
    fn identity(&self) -> &str {
        (**self).identity()
    }

    fn generate(&self, prompt: &str, config: &GenerationConfig) -> Result<String, BackendError> {
        (**self).generate(prompt, config)
    }
}

impl<B: GenerationBackend + ?Sized> GenerationBackend for std::sync::Arc<B> {
    fn identity(&self) -> &str {
        (**self).identity()
    }

    fn generate(&self, prompt: &str, config: &GenerationConfig) -> Result<String, BackendError> {
        (**self).generate(prompt, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_defaults() {
        let c = GenerationConfig::default();
        assert_eq!((c.max_new_tokens, c.sampling, c.top_k, c.repetition_penalty), (512, false, 50, 1.1));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_bad_config() {
        let bad = GenerationConfig { top_k: 0, ..GenerationConfig::default() };
        assert!(bad.validate().is_err());
        let bad = GenerationConfig { repetition_penalty: 0.0, ..GenerationConfig::default() };
        assert!(bad.validate().is_err());
    }
}
