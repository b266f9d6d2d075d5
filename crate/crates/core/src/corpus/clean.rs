//! Rule-based text cleaning.
//!
//! Applied per line: NFKC normalization, whitespace runs collapsed to one
//! space and trimmed, lines matching a boilerplate pattern dropped. Runs of
//! blank lines are then limited to `max_blank_lines` and leading/trailing
//! blank lines removed. Every step is idempotent, so cleaning twice equals
//! cleaning once.

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{CorpusError, RawDocument};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    /// Regexes matched against each normalized line; matching lines are removed.
    pub boilerplate_patterns: Vec<String>,
    /// Longest run of blank lines kept. `0` removes blank lines entirely.
    pub max_blank_lines: usize,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self { boilerplate_patterns: Vec::new(), max_blank_lines: 0 }
    }
}

/// Compiled form of [`CleaningConfig`].
#[derive(Debug, Clone)]
pub struct TextCleaner {
    patterns: Vec<Regex>,
    max_blank_lines: usize,
}

impl TextCleaner {
    pub fn new(config: &CleaningConfig) -> Result<Self, CorpusError> {
        let patterns = config
            .boilerplate_patterns
            .iter()
            .map(|p| {
                Regex::new(p).map_err(|e| CorpusError::InvalidPattern { pattern: p.clone(), message: e.to_string() })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { patterns, max_blank_lines: config.max_blank_lines })
    }

    /// Cleans arbitrary text. May return an empty string.
    pub fn clean_str(&self, text: &str) -> String {
        let mut out: Vec<String> = Vec::new();
        let mut blank_run = 0;
        for line in text.lines() {
            let normalized: String = line.nfkc().collect();
            let collapsed = normalized.split_whitespace().collect::<Vec<_>>().join(" ");
            if collapsed.is_empty() {
                blank_run += 1;
                if blank_run <= self.max_blank_lines && !out.is_empty() {
                    out.push(String::new());
                }
                continue;
            }
            if self.patterns.iter().any(|re| re.is_match(&collapsed)) {
                continue;
            }
            blank_run = 0;
            out.push(collapsed);
        }
        while out.last().is_some_and(String::is_empty) {
            out.pop();
        }
        out.join("\n")
    }

    pub fn clean(&self, raw: &RawDocument) -> Result<String, CorpusError> {
        let cleaned = self.clean_str(&raw.body);
        if cleaned.is_empty() {
            return Err(CorpusError::EmptyAfterCleaning(raw.id.clone()));
        }
        Ok(cleaned)
    }
}

/// Cleans `raw.body` under `rules`.
pub fn clean_text(raw: &RawDocument, rules: &CleaningConfig) -> Result<String, CorpusError> {
    TextCleaner::new(rules)?.clean(raw)
}
