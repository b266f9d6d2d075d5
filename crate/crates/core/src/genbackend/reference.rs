//! Backend running greedy decoding over a [`TinyLm`] with a tokenizer.

use std::sync::Arc;

use crate::genbackend::{greedy_decode, BackendError, GenerationBackend, GenerationConfig};
use crate::trainer::model::TinyLm;
use crate::trainer::tokenizer::Tokenizer;

pub struct ReferenceBackend {
    identity: String,
    model: Arc<TinyLm>,
    tokenizer: Arc<dyn Tokenizer>,
}

impl ReferenceBackend {
    pub fn new(identity: impl Into<String>, model: Arc<TinyLm>, tokenizer: Arc<dyn Tokenizer>) -> Self {
        Self { identity: identity.into(), model, tokenizer }
    }
}

impl GenerationBackend for ReferenceBackend {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn generate(&self, prompt: &str, config: &GenerationConfig) -> Result<String, BackendError> {
        config.validate()?;
        if config.sampling {
            return Err(BackendError::InvalidConfig("the reference decoder only supports greedy decoding".into()));
        }
        let prompt_ids = self.tokenizer.encode(prompt);
        if prompt_ids.is_empty() {
            return Err(BackendError::Generation("empty prompt".into()));
        }
        if let Some(&t) = prompt_ids.iter().find(|&&t| t as usize >= self.model.vocab_size) {
            return Err(BackendError::Generation(format!("prompt token {t} outside model vocabulary")));
        }
        let ids = greedy_decode(&self.model, &prompt_ids, config, self.tokenizer.eot_id());
        Ok(self.tokenizer.decode(&ids))
    }
}
