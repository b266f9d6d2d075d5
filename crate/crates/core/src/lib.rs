//! Domain-adaptation toolkit for a financial language model.
//!
//! The crate covers the full continual pre-training workflow at desk scale:
//!
//! * [`corpus`] ingests pre-fetched documents, cleans them and renders the six
//!   training record formats (markdown, section-wise, category-wise, company
//!   list, Q&A and multiple choice).
//! * [`synthgen`] rephrases passages into Q&A / multiple-choice items through a
//!   pluggable [`genbackend::GenerationBackend`].
//! * [`trainer`] packs token streams, runs a linear-to-zero learning-rate
//!   schedule over a small log-bilinear reference model, records and analyses
//!   loss curves and emits a plan manifest for full-scale trainers.
//! * [`evalharness`] builds zero-shot prompts, extracts answers, scores F1 or
//!   accuracy with binomial standard error and aggregates benchmark reports.
//! * [`comparer`] runs side-by-side generation between two backends and renders
//!   a markdown comparison report.

pub mod comparer;
pub mod corpus;
pub mod evalharness;
pub mod fixtures;
pub mod genbackend;
pub mod jsonl;
pub mod parallel;
pub mod synthgen;
pub mod trainer;

pub use trainer::tokenizer::{ByteTokenizer, Tokenizer};
