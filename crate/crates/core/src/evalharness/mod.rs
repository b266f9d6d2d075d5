//! Zero-shot benchmark evaluation: prompt construction, answer extraction,
//! F1 / accuracy scoring and the tuned-versus-original report.

pub mod extract;
pub mod prompt;
pub mod report;
pub mod run;
pub mod score;
pub mod task;

pub use extract::{extract_choice, extract_polarity, PolarityKeywords};
pub use prompt::build_prompt;
pub use report::{aggregate, diff, format_delta, render_table, BenchmarkReport, DiffReport, ReportDocument};
pub use run::{run_benchmark, AuditRecord, AuditSink, JsonlAudit, RunOptions};
pub use score::{score_accuracy, score_f1, Averaging, TaskScore};
pub use task::{load_task, EvalItem, EvalTask, McqEvalItem, Metric, Polarity, SentimentEvalItem, TaskRegistry};

use crate::genbackend::BackendError;
use crate::jsonl::JsonlError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("length mismatch: {preds} predictions for {golds} gold labels")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("{requested} few-shot exemplar(s) requested but the pool holds {available}")]
    MissingExemplars { requested: usize, available: usize },
    #[error("task sets differ: {0}")]
    TaskSetMismatch(String),
    #[error("invalid task `{task}`: {reason}")]
    InvalidTask { task: String, reason: String },
    #[error("invalid item `{id}`: {reason}")]
    InvalidItem { id: String, reason: String },
    #[error("backend failed on task `{task}` item `{item_id}`: {source}")]
    Backend {
        task: String,
        item_id: String,
        #[source]
        source: BackendError,
    },
    #[error("audit log: {0}")]
    Audit(#[from] std::io::Error),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}
