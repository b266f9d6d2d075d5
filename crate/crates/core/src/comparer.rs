//! Side-by-side generation from two backends on the same prompts, rendered as
//! a markdown report with per-model length statistics.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::genbackend::{BackendError, GenerationBackend, GenerationConfig};
use crate::parallel::ordered_map;
use crate::trainer::tokenizer::Tokenizer;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComparerError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Config(#[from] BackendError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SideOutput {
    Ok { text: String, chars: usize, tokens: usize },
    Failed { reason: String },
}

impl SideOutput {
    pub fn text(&self) -> Option<&str> {
        match self {
            SideOutput::Ok { text, .. } => Some(text),
            SideOutput::Failed { .. } => None,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, SideOutput::Ok { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonCase {
    pub prompt: String,
    pub model_a: String,
    pub model_b: String,
    pub output_a: SideOutput,
    pub output_b: SideOutput,
}

/// Non-blank lines of a prompt file, trimmed.
pub fn read_prompts(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
}

fn side(backend: &dyn GenerationBackend, prompt: &str, config: &GenerationConfig, tokenizer: &dyn Tokenizer) -> SideOutput {
    match backend.generate(prompt, config) {
        Ok(text) => SideOutput::Ok { chars: text.chars().count(), tokens: tokenizer.encode(&text).len(), text },
        Err(e) => {
            log::warn!("{} failed: {e}", backend.identity());
            SideOutput::Failed { reason: e.to_string() }
        }
    }
}

/// Sends every prompt to both backends under the same config. The two sides
/// of a prompt run concurrently; a failing side is recorded in its case and
/// the run continues.
pub fn compare_outputs(
    prompts: &[String],
    backend_a: &dyn GenerationBackend,
    backend_b: &dyn GenerationBackend,
    config: &GenerationConfig,
    tokenizer: &dyn Tokenizer,
    workers: usize,
) -> Result<Vec<ComparisonCase>, ComparerError> {
    if prompts.is_empty() {
        return Err(ComparerError::EmptyInput("no prompts"));
    }
    config.validate()?;
    Ok(ordered_map(prompts, workers, |prompt| {
        let (output_a, output_b) = thread::scope(|scope| {
            let a = scope.spawn(|| side(backend_a, prompt, config, tokenizer));
            let b = side(backend_b, prompt, config, tokenizer);
            (a.join().expect("generation thread panicked"), b)
        });
        ComparisonCase {
            prompt: prompt.clone(),
            model_a: backend_a.identity().to_string(),
            model_b: backend_b.identity().to_string(),
            output_a,
            output_b,
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: usize,
    pub max: usize,
    pub total: usize,
}

impl LengthStats {
    /// `None` when there are no lengths.
    pub fn from_lengths(lengths: &[usize]) -> Option<Self> {
        if lengths.is_empty() {
            return None;
        }
        let mut sorted = lengths.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let total: usize = sorted.iter().sum();
        let median = if n % 2 == 1 { sorted[n / 2] as f64 } else { (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0 };
        Some(Self { count: n, mean: total as f64 / n as f64, median, min: sorted[0], max: sorted[n - 1], total })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub failed: usize,
    pub chars: Option<LengthStats>,
    pub tokens: Option<LengthStats>,
}

/// Length statistics for side A and side B over their successful outputs.
pub fn summarize(cases: &[ComparisonCase]) -> Result<[ModelSummary; 2], ComparerError> {
    let first = cases.first().ok_or(ComparerError::EmptyInput("no cases"))?;
    let summary = |model: &str, outputs: Vec<&SideOutput>| {
        let (chars, tokens): (Vec<usize>, Vec<usize>) = outputs
            .iter()
            .filter_map(|o| match o {
                SideOutput::Ok { chars, tokens, .. } => Some((*chars, *tokens)),
                SideOutput::Failed { .. } => None,
            })
            .unzip();
        ModelSummary {
            model: model.to_string(),
            failed: outputs.len() - chars.len(),
            chars: LengthStats::from_lengths(&chars),
            tokens: LengthStats::from_lengths(&tokens),
        }
    };
    Ok([
        summary(&first.model_a, cases.iter().map(|c| &c.output_a).collect()),
        summary(&first.model_b, cases.iter().map(|c| &c.output_b).collect()),
    ])
}

fn title(prompt: &str) -> String {
    const MAX: usize = 40;
    let line = prompt.lines().next().unwrap_or("");
    if line.chars().count() > MAX {
        format!("{}…", line.chars().take(MAX).collect::<String>())
    } else {
        line.to_string()
    }
}

/// A fence longer than any backtick run inside `text`.
fn fence(text: &str) -> String {
    let longest = text.split(|c| c != '`').map(str::len).max().unwrap_or(0);
    "`".repeat(longest.max(2) + 1)
}

fn block(out: &mut String, model: &str, output: &SideOutput) {
    out.push_str(&format!("**{model}**\n\n"));
    match output {
        SideOutput::Ok { text, .. } => {
            let f = fence(text);
            out.push_str(&format!("{f}text\n{text}\n{f}\n\n"));
        }
        SideOutput::Failed { reason } => out.push_str(&format!("_generation failed: {reason}_\n\n")),
    }
}

fn stats_row(model: &str, failed: usize, stats: &Option<LengthStats>) -> String {
    match stats {
        Some(s) => format!(
            "| {model} | {} | {failed} | {:.1} | {:.1} | {} | {} | {} |\n",
            s.count, s.mean, s.median, s.min, s.max, s.total
        ),
        None => format!("| {model} | 0 | {failed} | - | - | - | - | - |\n"),
    }
}

/// The markdown report: one section per case with both outputs, then the
/// length summary in characters and tokens. Pure in `cases`.
pub fn render_comparison(cases: &[ComparisonCase]) -> Result<String, ComparerError> {
    let [a, b] = summarize(cases)?;
    let mut out = format!("# Output comparison: {} vs {}\n\n", a.model, b.model);
    for (i, case) in cases.iter().enumerate() {
        out.push_str(&format!("## {}. {}\n\n", i + 1, title(&case.prompt)));
        out.push_str(&format!("Prompt: {}\n\n", case.prompt));
        block(&mut out, &case.model_a, &case.output_a);
        out.push_str("---\n\n");
        block(&mut out, &case.model_b, &case.output_b);
    }
    out.push_str("## Summary\n");
    for (unit, pick) in [("characters", 0), ("tokens", 1)] {
        out.push_str(&format!(
            "\nOutput length ({unit}):\n\n| Model | Cases | Failed | Mean | Median | Min | Max | Total |\n|---|---|---|---|---|---|---|---|\n"
        ));
        for s in [&a, &b] {
            let stats = if pick == 0 { &s.chars } else { &s.tokens };
            out.push_str(&stats_row(&s.model, s.failed, stats));
        }
    }
    Ok(out)
}
