//! Deterministic templates for the structured record formats.
//!
//! Category:
//! ```text
//! # <name>
//! <description>
//! - <company> (<code>)
//! ```
//! Company list: one `name,code,industry` line per row; `\` `,` and newlines
//! inside fields are escaped as `\\`, `\,` and `\n`.
//!
//! Q&A: `Q: <question>\nA: <answer>`.
//!
//! Multiple choice:
//! ```text
//! Q: <question>
//! (1) <choice>
//! (2) <choice>
//! A: (<k>) <choice k>
//! ```

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{CategoryEntry, CompanyRow, CorpusError, CorpusRecord, FormatKind, SynthItem};
use crate::synthgen::validate_item;
use crate::trainer::tokenizer::Tokenizer;

pub const COMPANY_SEPARATOR: char = ',';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    /// Stock codes must match this regex.
    pub stock_code_pattern: String,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { stock_code_pattern: r"^[0-9]{4,5}$".to_string() }
    }
}

impl RenderConfig {
    pub fn code_regex(&self) -> Result<Regex, CorpusError> {
        Regex::new(&self.stock_code_pattern).map_err(|e| CorpusError::InvalidPattern {
            pattern: self.stock_code_pattern.clone(),
            message: e.to_string(),
        })
    }
}

pub fn category_text(entry: &CategoryEntry, code_pattern: &Regex) -> Result<String, CorpusError> {
    let name = entry.name.trim();
    if name.is_empty() {
        return Err(CorpusError::InvalidEntry("category name is empty".into()));
    }
    let mut lines = vec![format!("# {name}")];
    let description = entry.description.trim();
    if !description.is_empty() {
        lines.push(description.to_string());
    }
    for (company, code) in &entry.stocks {
        if !code_pattern.is_match(code) {
            return Err(CorpusError::InvalidEntry(format!(
                "stock code `{code}` of `{company}` does not match `{}`",
                code_pattern.as_str()
            )));
        }
        lines.push(format!("- {} ({code})", company.trim()));
    }
    Ok(lines.join("\n"))
}

pub fn render_category(
    entry: &CategoryEntry,
    id: impl Into<String>,
    provenance: Vec<String>,
    config: &RenderConfig,
    tokenizer: &dyn Tokenizer,
) -> Result<CorpusRecord, CorpusError> {
    let text = category_text(entry, &config.code_regex()?)?;
    Ok(CorpusRecord::new(id, FormatKind::Category, text, provenance, tokenizer))
}

pub fn escape_field(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            COMPANY_SEPARATOR => out.push_str("\\,"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Splits one company-list line back into its escaped-decoded fields.
pub fn split_company_line(line: &str) -> Vec<String> {
    let mut fields = vec![String::new()];
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('n') => fields.last_mut().unwrap().push('\n'),
                Some('r') => fields.last_mut().unwrap().push('\r'),
                Some(other) => fields.last_mut().unwrap().push(other),
                None => fields.last_mut().unwrap().push('\\'),
            },
            COMPANY_SEPARATOR => fields.push(String::new()),
            c => fields.last_mut().unwrap().push(c),
        }
    }
    fields
}

pub fn company_list_text(rows: &[CompanyRow]) -> Result<String, CorpusError> {
    if rows.is_empty() {
        return Err(CorpusError::EmptyInput("company list has no rows"));
    }
    let mut lines = Vec::with_capacity(rows.len());
    for row in rows {
        if row.name.trim().is_empty() || row.code.trim().is_empty() || row.industry.trim().is_empty() {
            return Err(CorpusError::InvalidEntry(format!("company row {row:?} has an empty field")));
        }
        lines.push(format!(
            "{}{sep}{}{sep}{}",
            escape_field(&row.name),
            escape_field(&row.code),
            escape_field(&row.industry),
            sep = COMPANY_SEPARATOR
        ));
    }
    Ok(lines.join("\n"))
}

pub fn render_company_list(
    rows: &[CompanyRow],
    id: impl Into<String>,
    provenance: Vec<String>,
    tokenizer: &dyn Tokenizer,
) -> Result<CorpusRecord, CorpusError> {
    let text = company_list_text(rows)?;
    Ok(CorpusRecord::new(id, FormatKind::CompanyList, text, provenance, tokenizer))
}

/// The layout shared by training records and generator output.
pub fn synthetic_text(item: &SynthItem) -> String {
    match item {
        SynthItem::Qa(qa) => format!("Q: {}\nA: {}", qa.question, qa.answer),
        SynthItem::Mcq(mcq) => {
            let mut out = format!("Q: {}", mcq.question);
            for (i, choice) in mcq.choices.iter().enumerate() {
                out.push_str(&format!("\n({}) {choice}", i + 1));
            }
            out.push_str(&format!("\nA: ({}) {}", mcq.answer_index + 1, mcq.choices[mcq.answer_index]));
            out
        }
    }
}

pub fn render_synthetic(
    item: &SynthItem,
    id: impl Into<String>,
    provenance: Vec<String>,
    tokenizer: &dyn Tokenizer,
) -> Result<CorpusRecord, CorpusError> {
    validate_item(item, None).map_err(CorpusError::InvalidItem)?;
    let kind = match item {
        SynthItem::Qa(_) => FormatKind::Qa,
        SynthItem::Mcq(_) => FormatKind::Mcq,
    };
    Ok(CorpusRecord::new(id, kind, synthetic_text(item), provenance, tokenizer))
}
