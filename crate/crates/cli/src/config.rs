//! The TOML pipeline configuration.

use std::path::Path;

use fincpt_core::corpus::FormatOptions;
use fincpt_core::evalharness::RunOptions;
use fincpt_core::genbackend::{GenerationConfig, RetryPolicy};
use fincpt_core::synthgen::SynthConfig;
use fincpt_core::trainer::{AnalyzeParams, ReferenceSettings, TrainPlan};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PackConfig {
    /// Defaults to the plan's `max_seq_len`.
    pub max_len: Option<usize>,
    pub pad_id: Option<u32>,
}

/// Every setting a subcommand may read. Missing tables take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub workers: usize,
    pub tokenizer: String,
    pub format: FormatOptions,
    pub synth: SynthConfig,
    pub pack: PackConfig,
    pub plan: TrainPlan,
    pub reference: ReferenceSettings,
    pub analyze: AnalyzeParams,
    pub generation: GenerationConfig,
    pub retry: RetryPolicy,
    pub eval: RunOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 1,
            tokenizer: "byte".to_string(),
            format: FormatOptions::default(),
            synth: SynthConfig::default(),
            pack: PackConfig::default(),
            plan: TrainPlan::default(),
            reference: ReferenceSettings::default(),
            analyze: AnalyzeParams::default(),
            generation: GenerationConfig::default(),
            retry: RetryPolicy::default(),
            eval: RunOptions::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads TOML, or JSON when the file ends in `.json` (the form echoed in
    /// output headers).
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("{}: {e}", path.display()));
        let text = std::fs::read_to_string(path).map_err(|e| bad(&e))?;
        if path.extension().is_some_and(|ext| ext == "json") {
            serde_json::from_str(&text).map_err(|e| bad(&e))
        } else {
            toml::from_str(&text).map_err(|e| bad(&e))
        }
    }

    /// Copies the run-wide seed, worker count and generation settings into the
    /// per-stage settings.
    pub fn apply_overrides(&mut self, seed: Option<u64>, workers: Option<usize>) {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(workers) = workers {
            self.workers = workers;
        }
        self.workers = self.workers.max(1);
        self.format.workers = self.workers;
        self.synth.workers = self.workers;
        self.eval.workers = self.workers;
        self.synth.generation = self.generation;
    }
}
