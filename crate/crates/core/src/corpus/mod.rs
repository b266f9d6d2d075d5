//! Corpus construction: ingestion of pre-fetched documents, cleaning, and
//! rendering into the six record formats.

pub mod clean;
pub mod dedupe;
pub mod ingest;
pub mod markdown;
pub mod pipeline;
pub mod render;
pub mod sections;
pub mod stats;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::trainer::tokenizer::Tokenizer;

pub use clean::{clean_text, CleaningConfig, TextCleaner};
pub use dedupe::{dedupe, jaccard, DedupeConfig};
pub use ingest::{load_manifest, ManifestEntry};
pub use markdown::to_markdown;
pub use pipeline::{build_corpus, FormatOptions, FormatReport};
pub use render::{render_category, render_company_list, render_synthetic, RenderConfig};
pub use sections::{consolidate_sections, document_title, SectionOptions};
pub use stats::{corpus_stats, CorpusStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    BojSpeech,
    BojMinutes,
    InstitutionReport,
    Glossary,
    CompanyProfile,
    Wikipedia,
    EdinetReport,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mime {
    Html,
    PdfText,
    Plain,
    WikiDump,
    /// Any value not recognised at load time.
    #[serde(other)]
    Unknown,
}

/// A fetched source document with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub source_kind: SourceKind,
    pub mime: Mime,
    pub uri: String,
    pub body: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatKind {
    Markdown,
    Section,
    Category,
    CompanyList,
    Qa,
    Mcq,
}

impl FormatKind {
    pub const ALL: [FormatKind; 6] = [
        FormatKind::Markdown,
        FormatKind::Section,
        FormatKind::Category,
        FormatKind::CompanyList,
        FormatKind::Qa,
        FormatKind::Mcq,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormatKind::Markdown => "markdown",
            FormatKind::Section => "section",
            FormatKind::Category => "category",
            FormatKind::CompanyList => "company_list",
            FormatKind::Qa => "qa",
            FormatKind::Mcq => "mcq",
        }
    }
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One training record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub format_kind: FormatKind,
    pub text: String,
    /// Tokenizer output length of `text`. Absent only in externally produced files.
    #[serde(default)]
    pub token_count: Option<usize>,
    pub provenance: Vec<String>,
}

impl CorpusRecord {
    pub fn new(
        id: impl Into<String>,
        format_kind: FormatKind,
        text: impl Into<String>,
        provenance: Vec<String>,
        tokenizer: &dyn Tokenizer,
    ) -> Self {
        let text = text.into();
        let token_count = Some(tokenizer.encode(&text).len());
        Self { id: id.into(), format_kind, text, token_count, provenance }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryEntry {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// `(company name, stock code)` pairs.
    #[serde(default)]
    pub stocks: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyRow {
    pub name: String,
    pub code: String,
    pub industry: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqItem {
    pub question: String,
    pub choices: Vec<String>,
    pub answer_index: usize,
}

/// A synthetic training item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthItem {
    Qa(QaPair),
    Mcq(McqItem),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("document `{0}` is empty after cleaning")]
    EmptyAfterCleaning(String),
    #[error("document `{id}` has unsupported mime type")]
    UnsupportedMime { id: String },
    #[error("document `{id}` has no level-{level} headings")]
    NoSections { id: String, level: usize },
    #[error("invalid category entry: {0}")]
    InvalidEntry(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid item: {0:?}")]
    InvalidItem(Vec<crate::synthgen::Violation>),
    #[error("record `{0}` has no token count")]
    MissingTokenCounts(String),
    #[error("invalid boilerplate pattern `{pattern}`: {message}")]
    InvalidPattern { pattern: String, message: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("document `{id}`: {message}")]
    StructuredBody { id: String, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ByteTokenizer;

    #[test]
    fn record_json_field_order_is_stable() {
        let rec = CorpusRecord::new("d1#md", FormatKind::Markdown, "ab", vec!["d1".into()], &ByteTokenizer);
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            json,
            r#"{"id":"d1#md","format_kind":"markdown","text":"ab","token_count":2,"provenance":["d1"]}"#
        );
    }

    #[test]
    fn unknown_mime_parses() {
        let doc: RawDocument = serde_json::from_str(
            r#"{"id":"x","source_kind":"other","mime":"docx","uri":"u","body":"b"}"#,
        )
        .unwrap();
        assert_eq!(doc.mime, Mime::Unknown);
    }
}
