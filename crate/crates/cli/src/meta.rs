//! Run-metadata headers written at the top of every output file.

use std::time::{SystemTime, UNIX_EPOCH};

use fincpt_core::jsonl::META_KEY;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// SHA-256 of the effective config as compact JSON.
    pub config_hash: String,
    pub config: PipelineConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    /// Command-specific details, such as the packed-data header.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

pub fn config_hash(config: &PipelineConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunMeta {
    pub fn new(command: &str, config: &PipelineConfig, timestamp: bool) -> Self {
        let timestamp_unix = timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.seed,
            config_hash: config_hash(config),
            config: config.clone(),
            timestamp_unix,
            data: None,
        }
    }

    pub fn with_data(mut self, data: serde_json::Value) -> Self {
        self.data = Some(data);
        self
    }

    fn json(&self) -> String {
        serde_json::to_string(self).expect("metadata serializes")
    }

    /// `{"_meta": {...}}`, the first line of JSONL outputs.
    pub fn jsonl_line(&self) -> String {
        format!("{{\"{META_KEY}\":{}}}\n", self.json())
    }

    /// A `#` comment line for CSV and manifest outputs.
    pub fn comment_line(&self) -> String {
        format!("# {}\n", self.json())
    }

    /// An HTML comment line for markdown outputs.
    pub fn markdown_line(&self) -> String {
        format!("<!-- {} -->\n", self.json())
    }
}

#[cfg(test)]
/// The metadata from the first line of an output file, in any of the three
/// header styles.
pub fn read_meta(text: &str) -> Option<RunMeta> {
    let first = text.lines().next()?;
    let json = if let Some(rest) = first.strip_prefix("# ") {
        rest
    } else if let Some(rest) = first.strip_prefix("<!-- ").and_then(|r| r.strip_suffix(" -->")) {
        rest
    } else {
        let value: serde_json::Value = serde_json::from_str(first).ok()?;
        return serde_json::from_value(value.get(META_KEY)?.clone()).ok();
    };
    serde_json::from_str(json).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_styles_parse_back() {
        let meta = RunMeta::new("stats", &PipelineConfig::default(), false);
        for line in [meta.jsonl_line(), meta.comment_line(), meta.markdown_line()] {
            assert_eq!(read_meta(&line), Some(meta.clone()));
        }
        assert!(!meta.jsonl_line().contains("timestamp"));
        assert_eq!(meta.config_hash.len(), 64);
    }

    #[test]
    fn hash_tracks_config() {
        let a = PipelineConfig::default();
        let b = PipelineConfig { seed: 1, ..PipelineConfig::default() };
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
    }
}
