use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::evalharness::{
    aggregate, build_prompt, extract_choice, extract_polarity, score_accuracy, score_f1, Averaging, BenchmarkReport,
    EvalError, EvalItem, EvalTask, Metric, PolarityKeywords, TaskRegistry,
};
use crate::genbackend::{GenerationBackend, GenerationConfig};
use crate::parallel::ordered_map;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub fewshots: usize,
    pub workers: usize,
    pub averaging: Averaging,
    pub keywords: PolarityKeywords,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { fewshots: 0, workers: 1, averaging: Averaging::Micro, keywords: PolarityKeywords::default() }
    }
}

/// One evaluated item. `extraction` is the chosen 0-based index or polarity,
/// absent on abstention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub task: String,
    pub item_id: String,
    pub prompt: String,
    pub generation: String,
    pub extraction: Option<String>,
    pub correct: bool,
}

pub trait AuditSink {
    fn record(&mut self, record: &AuditRecord) -> std::io::Result<()>;
}

impl AuditSink for Vec<AuditRecord> {
    fn record(&mut self, record: &AuditRecord) -> std::io::Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

/// Writes audit records as JSONL, flushing after each line so a failed run
/// leaves every finished item on disk.
pub struct JsonlAudit<W: Write>(pub W);

impl<W: Write> AuditSink for JsonlAudit<W> {
    fn record(&mut self, record: &AuditRecord) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.0, record)?;
        self.0.write_all(b"\n")?;
        self.0.flush()
    }
}

/// Evaluates every item of every task with `backend`, writes one audit record
/// per item in dataset order and aggregates the scores. A backend failure
/// aborts the run after the items before it have been audited.
pub fn run_benchmark(
    tasks: &[EvalTask],
    backend: &dyn GenerationBackend,
    config: &GenerationConfig,
    options: &RunOptions,
    registry: &TaskRegistry,
    audit: &mut dyn AuditSink,
) -> Result<BenchmarkReport, EvalError> {
    if tasks.is_empty() {
        return Err(EvalError::EmptyInput("no tasks to run"));
    }
    let mut per_task = BTreeMap::new();
    for task in tasks {
        let outcomes = ordered_map(&task.items, options.workers, |item| {
            let prompt = build_prompt(item, options.fewshots, &task.items)?;
            let generation = backend.generate(&prompt, config).map_err(|source| EvalError::Backend {
                task: task.name.clone(),
                item_id: item.id().to_string(),
                source,
            })?;
            Ok::<_, EvalError>((prompt, generation))
        });
        let mut mcq = (Vec::new(), Vec::new());
        let mut sentiment = (Vec::new(), Vec::new());
        for (item, outcome) in task.items.iter().zip(outcomes) {
            let (prompt, generation) = outcome?;
            let (extraction, correct) = match item {
                EvalItem::Mcq(m) => {
                    let pred = extract_choice(&generation, &m.choices);
                    mcq.0.push(pred);
                    mcq.1.push(m.gold_index);
                    (pred.map(|i| i.to_string()), pred == Some(m.gold_index))
                }
                EvalItem::Sentiment(s) => {
                    let pred = extract_polarity(&generation, &options.keywords);
                    sentiment.0.push(pred);
                    sentiment.1.push(s.gold_polarity);
                    (pred.map(|p| p.to_string()), pred == Some(s.gold_polarity))
                }
            };
            audit.record(&AuditRecord {
                task: task.name.clone(),
                item_id: item.id().to_string(),
                prompt,
                generation,
                extraction,
                correct,
            })?;
        }
        let score = match task.metric {
            Metric::Accuracy => score_accuracy(&mcq.0, &mcq.1)?,
            Metric::F1 => score_f1(&sentiment.0, &sentiment.1, options.averaging)?,
        };
        log::info!("{}: {:.4} (n={})", task.name, score.value, score.n);
        per_task.insert(task.name.clone(), score);
    }
    aggregate(backend.identity(), per_task, registry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalharness::{McqEvalItem, Polarity, SentimentEvalItem};
    use crate::genbackend::MockBackend;

    fn mcq_task(n: usize) -> EvalTask {
        let items = (0..n)
            .map(|i| {
                EvalItem::Mcq(McqEvalItem {
                    id: format!("q{i}"),
                    question: format!("Item {i}: which?"),
                    choices: ["w", "x", "y", "z"].map(String::from).to_vec(),
                    gold_index: i % 4,
                })
            })
            .collect();
        EvalTask::new("fp2", items, &TaskRegistry::financial()).unwrap()
    }

    /// Answers item `i` correctly when `i < k`, otherwise abstains.
    fn planted(k: usize) -> MockBackend {
        MockBackend::new("planted", move |prompt: &str, _: &GenerationConfig| {
            let i: usize = prompt.split("Item ").nth(1).and_then(|r| r.split(':').next()).unwrap().parse().unwrap();
            Ok(if i < k { format!("{}", i % 4 + 1) } else { "not sure".into() })
        })
    }

    #[test]
    fn planted_accuracy() {
        let mut audit = Vec::new();
        let r = run_benchmark(
            &[mcq_task(10)],
            &planted(7),
            &GenerationConfig::default(),
            &RunOptions::default(),
            &TaskRegistry::financial(),
            &mut audit,
        )
        .unwrap();
        assert_eq!(r.per_task["fp2"].value, 0.7);
        assert!(r.partial);
        assert_eq!(audit.len(), 10);
        assert_eq!(audit[8].extraction, None);
        assert!(audit[2].correct);
    }

    #[test]
    fn gold_echo_sentiment() {
        let golds = [Polarity::Positive, Polarity::Negative, Polarity::Neutral, Polarity::Negative];
        let items = golds
            .iter()
            .enumerate()
            .map(|(i, g)| {
                EvalItem::Sentiment(SentimentEvalItem {
                    id: format!("s{i}"),
                    sentence: format!("Target{i} was {g} this quarter."),
                    target: format!("Target{i}"),
                    gold_polarity: *g,
                })
            })
            .collect();
        let task = EvalTask::new("chabsa", items, &TaskRegistry::financial()).unwrap();
        let echo = MockBackend::new("echo", |prompt: &str, _: &GenerationConfig| {
            let sentence = prompt.split("Sentence: ").nth(1).unwrap();
            Ok(sentence.split(" was ").nth(1).unwrap().split(' ').next().unwrap().to_string())
        });
        let opts = RunOptions { workers: 3, ..RunOptions::default() };
        let r = run_benchmark(&[task], &echo, &GenerationConfig::default(), &opts, &TaskRegistry::financial(), &mut Vec::new())
            .unwrap();
        assert_eq!(r.per_task["chabsa"].value, 1.0);
    }

    #[test]
    fn backend_failure_keeps_audited_prefix() {
        let flaky = MockBackend::new("flaky", |prompt: &str, _: &GenerationConfig| {
            if prompt.contains("Item 3:") {
                Err(crate::genbackend::BackendError::Generation("boom".into()))
            } else {
                Ok("1".into())
            }
        });
        let mut audit = Vec::new();
        let err = run_benchmark(
            &[mcq_task(6)],
            &flaky,
            &GenerationConfig::default(),
            &RunOptions::default(),
            &TaskRegistry::financial(),
            &mut audit,
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::Backend { ref item_id, .. } if item_id == "q3"));
        assert_eq!(audit.len(), 3);
    }

    #[test]
    fn repeated_runs_identical() {
        let run = || {
            let mut audit = Vec::new();
            let opts = RunOptions { workers: 4, ..RunOptions::default() };
            let r = run_benchmark(&[mcq_task(12)], &planted(5), &GenerationConfig::default(), &opts, &TaskRegistry::financial(), &mut audit)
                .unwrap();
            (serde_json::to_string(&r).unwrap(), audit)
        };
        assert_eq!(run(), run());
    }
}
