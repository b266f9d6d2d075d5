//! The rephrasing loop: prompt, generate, parse, validate, emit.

use serde::{Deserialize, Serialize};

use crate::corpus::{render_synthetic, CorpusRecord, FormatKind, SynthItem};
use crate::genbackend::{BackendError, GenerationBackend, GenerationConfig};
use crate::parallel::ordered_map;
use crate::synthgen::{
    make_rephrase_prompt, parse_generation, validate_item, ItemKind, PromptTemplates, RephraseRequest, SynthError,
};
use crate::trainer::tokenizer::Tokenizer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub text: String,
    /// Raw-document ids the passage came from.
    #[serde(default)]
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub items_per_passage: usize,
    pub max_items_ceiling: usize,
    /// Consecutive backend failures tolerated before giving up.
    pub failure_budget: usize,
    pub workers: usize,
    pub generation: GenerationConfig,
    pub templates: PromptTemplates,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            items_per_passage: 1,
            max_items_ceiling: 16,
            failure_budget: 5,
            workers: 1,
            generation: GenerationConfig::default(),
            templates: PromptTemplates::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RephraseResult {
    pub passage_id: String,
    pub provenance: Vec<String>,
    pub items: Vec<SynthItem>,
    pub raw_generation: String,
    /// Parsed items dropped as malformed, invalid or over the item limit.
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedPassage {
    pub passage_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub results: Vec<RephraseResult>,
    pub skipped: Vec<SkippedPassage>,
    pub backend_calls: usize,
}

enum PassageOutcome {
    Empty,
    Done(RephraseResult),
    Skipped(String),
    BackendFailed(BackendError),
}

fn process(
    passage: &Passage,
    kind: ItemKind,
    backend: &dyn GenerationBackend,
    config: &SynthConfig,
) -> PassageOutcome {
    let req = RephraseRequest { passage: passage.text.clone(), kind, max_items: config.items_per_passage };
    let prompt = make_rephrase_prompt(&req, &config.templates);
    let raw = match backend.generate(&prompt, &config.generation) {
        Ok(raw) => raw,
        Err(e) => return PassageOutcome::BackendFailed(e),
    };
    let parsed = match parse_generation(&raw, kind) {
        Ok(p) => p,
        Err(e) => return PassageOutcome::Skipped(e.to_string()),
    };
    let mut dropped = parsed.dropped;
    let mut items = Vec::new();
    for item in parsed.items {
        if items.len() < req.max_items && validate_item(&item, Some(&passage.text)).is_ok() {
            items.push(item);
        } else {
            dropped += 1;
        }
    }
    if items.is_empty() {
        return PassageOutcome::Skipped(format!("no valid items ({dropped} dropped)"));
    }
    let provenance = if passage.provenance.is_empty() { vec![passage.id.clone()] } else { passage.provenance.clone() };
    PassageOutcome::Done(RephraseResult { passage_id: passage.id.clone(), provenance, items, raw_generation: raw, dropped })
}

/// Runs every passage through the backend. Parse and validation failures skip
/// the passage; backend errors count against `failure_budget` and reset on
/// success. Results are in passage order.
pub fn generate_synthetic(
    passages: &[Passage],
    kind: ItemKind,
    backend: &dyn GenerationBackend,
    config: &SynthConfig,
) -> Result<SynthOutput, SynthError> {
    if config.failure_budget == 0 {
        return Err(SynthError::InvalidRequest("failure_budget must be at least 1".into()));
    }
    if config.items_per_passage < 1 || config.items_per_passage > config.max_items_ceiling {
        return Err(SynthError::InvalidRequest(format!(
            "items_per_passage {} outside [1, {}]",
            config.items_per_passage, config.max_items_ceiling
        )));
    }

    let mut out = SynthOutput::default();
    let mut consecutive_failures = 0usize;
    let mut next = 0usize;
    while next < passages.len() {
        let wave = config.workers.max(1).min(config.failure_budget - consecutive_failures);
        let end = (next + wave).min(passages.len());
        let batch = &passages[next..end];
        let outcomes = ordered_map(batch, config.workers, |p| {
            if p.text.trim().is_empty() {
                PassageOutcome::Empty
            } else {
                process(p, kind, backend, config)
            }
        });
        for (passage, outcome) in batch.iter().zip(outcomes) {
            match outcome {
                PassageOutcome::Empty => {
                    out.skipped.push(SkippedPassage { passage_id: passage.id.clone(), reason: "empty passage".into() });
                }
                PassageOutcome::Done(result) => {
                    out.backend_calls += 1;
                    consecutive_failures = 0;
                    out.results.push(result);
                }
                PassageOutcome::Skipped(reason) => {
                    out.backend_calls += 1;
                    consecutive_failures = 0;
                    log::info!("skipping passage {}: {reason}", passage.id);
                    out.skipped.push(SkippedPassage { passage_id: passage.id.clone(), reason });
                }
                PassageOutcome::BackendFailed(err) => {
                    out.backend_calls += 1;
                    consecutive_failures += 1;
                    log::warn!("backend failed on passage {}: {err}", passage.id);
                    out.skipped.push(SkippedPassage { passage_id: passage.id.clone(), reason: err.to_string() });
                    if consecutive_failures >= config.failure_budget {
                        return Err(SynthError::BackendUnavailable { consecutive_failures, last_error: err.to_string() });
                    }
                }
            }
        }
        next = end;
    }
    Ok(out)
}

/// Renders results as `qa` / `mcq` corpus records with ids `<passage>#<kind><n>`.
pub fn results_to_records(results: &[RephraseResult], tokenizer: &dyn Tokenizer) -> Vec<CorpusRecord> {
    let mut records = Vec::new();
    for result in results {
        for (i, item) in result.items.iter().enumerate() {
            let kind = match item {
                SynthItem::Qa(_) => FormatKind::Qa,
                SynthItem::Mcq(_) => FormatKind::Mcq,
            };
            let record = render_synthetic(item, format!("{}#{kind}{i}", result.passage_id), result.provenance.clone(), tokenizer)
                .expect("emitted items are validated");
            records.push(record);
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genbackend::MockBackend;
    use crate::ByteTokenizer;

    fn passages(n: usize) -> Vec<Passage> {
        (0..n)
            .map(|i| Passage { id: format!("p{i}"), text: format!("Passage number {i} about rates."), provenance: vec![] })
            .collect()
    }

    fn qa_backend() -> MockBackend {
        MockBackend::new("qa", |prompt: &str, _: &GenerationConfig| {
            let n = prompt.rfind("number ").map(|i| &prompt[i + 7..]).unwrap_or("").split(' ').next().unwrap_or("");
            Ok(format!("Q: What is passage {n} about?\nA: Rates."))
        })
    }

    #[test]
    fn one_result_per_passage() {
        let out = generate_synthetic(&passages(3), ItemKind::Qa, &qa_backend(), &SynthConfig::default()).unwrap();
        assert_eq!(out.results.len(), 3);
        assert!(out.skipped.is_empty());
        assert_eq!(out.results[2].provenance, vec!["p2".to_string()]);
        let records = results_to_records(&out.results, &ByteTokenizer);
        assert_eq!(records[1].id, "p1#qa0");
        assert_eq!(records[1].text, "Q: What is passage 1 about?\nA: Rates.");
    }

    #[test]
    fn garbage_generation_skips_passage() {
        let backend = MockBackend::fixed("junk", "nothing useful here");
        let out = generate_synthetic(&passages(1), ItemKind::Qa, &backend, &SynthConfig::default()).unwrap();
        assert!(out.results.is_empty());
        assert_eq!(out.skipped.len(), 1);
    }

    #[test]
    fn failure_budget_stops_the_run() {
        let backend = MockBackend::failing("down");
        let cfg = SynthConfig { failure_budget: 5, workers: 3, ..SynthConfig::default() };
        let err = generate_synthetic(&passages(20), ItemKind::Qa, &backend, &cfg).unwrap_err();
        assert!(matches!(err, SynthError::BackendUnavailable { consecutive_failures: 5, .. }));
        assert_eq!(backend.calls(), 5);
    }

    #[test]
    fn deterministic_and_restartable() {
        let cfg = SynthConfig { workers: 4, ..SynthConfig::default() };
        let all = passages(10);
        let full = generate_synthetic(&all, ItemKind::Qa, &qa_backend(), &cfg).unwrap();
        let again = generate_synthetic(&all, ItemKind::Qa, &qa_backend(), &cfg).unwrap();
        assert_eq!(full, again);
        let tail = generate_synthetic(&all[6..], ItemKind::Qa, &qa_backend(), &cfg).unwrap();
        assert_eq!(tail.results, full.results[6..].to_vec());
    }

    #[test]
    fn item_limit_drops_extras() {
        let backend = MockBackend::fixed("two", "Q: a?\nA: b\n\nQ: c?\nA: d");
        let out = generate_synthetic(&passages(1), ItemKind::Qa, &backend, &SynthConfig::default()).unwrap();
        assert_eq!(out.results[0].items.len(), 1);
        assert_eq!(out.results[0].dropped, 1);
    }
}
