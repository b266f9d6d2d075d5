//! Rephrasing source passages into Q&A and multiple-choice training items.
//!
//! A prompt embeds the passage and asks the generator for a fixed,
//! line-oriented layout (the same layout the corpus renders); the generation
//! is parsed back into items, each item validated, and the result emitted with
//! the passage's provenance.

pub mod parse;
pub mod pipeline;
pub mod prompt;
pub mod validate;

use serde::{Deserialize, Serialize};

pub use parse::{parse_generation, ParseOutcome};
pub use pipeline::{generate_synthetic, results_to_records, Passage, RephraseResult, SkippedPassage, SynthConfig, SynthOutput};
pub use prompt::{make_rephrase_prompt, PromptTemplates, RephraseRequest};
pub use validate::{validate_item, Field, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Qa,
    Mcq,
}

impl std::str::FromStr for ItemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qa" => Ok(ItemKind::Qa),
            "mcq" => Ok(ItemKind::Mcq),
            other => Err(format!("unknown item kind `{other}` (expected qa or mcq)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("no well-formed items in generation")]
    NoItemsParsed { dropped: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend unavailable after {consecutive_failures} consecutive failures: {last_error}")]
    BackendUnavailable { consecutive_failures: usize, last_error: String },
}
