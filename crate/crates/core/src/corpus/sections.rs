//! Section-wise consolidation of markdown documents.
//!
//! The document is split at ATX headings of the chosen level. Each record is
//!
//! ```text
//! # <document title>
//! ## <section title>
//!
//! <section body>
//! ```
//!
//! Content before the first split heading is prepended to the first section.
//! Headings deeper than the split level stay in the body; shallower ones are
//! structural and dropped. Lines inside fenced code blocks are never headings.

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, CorpusRecord, FormatKind, RawDocument};
use crate::trainer::tokenizer::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SectionOptions {
    /// Heading level (1-6) at which sections are cut.
    pub level: usize,
    /// Fail with `NoSections` instead of falling back to one record.
    pub strict: bool,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self { level: 2, strict: false }
    }
}

/// Level of an ATX heading line, if it is one.
pub fn heading_level(line: &str) -> Option<usize> {
    let hashes = line.bytes().take_while(|&b| b == b'#').count();
    if !(1..=6).contains(&hashes) {
        return None;
    }
    match line.as_bytes().get(hashes) {
        None | Some(b' ') | Some(b'\t') => Some(hashes),
        _ => None,
    }
}

fn heading_text(line: &str, level: usize) -> &str {
    line[level..].trim().trim_end_matches('#').trim_end()
}

/// Classifies each line as a structural heading (level <= `level`) or content.
/// Returns `(line, Some(level))` for structural headings.
fn classify(markdown: &str, level: usize) -> Vec<(&str, Option<usize>)> {
    let mut in_fence = false;
    markdown
        .lines()
        .map(|line| {
            if line.trim_start().starts_with("```") {
                in_fence = !in_fence;
                return (line, None);
            }
            if in_fence {
                return (line, None);
            }
            match heading_level(line) {
                Some(l) if l <= level => (line, Some(l)),
                _ => (line, None),
            }
        })
        .collect()
}

/// Document title: `metadata["title"]`, else the first level-1 heading,
/// else the document id.
pub fn document_title(raw: &RawDocument, markdown: &str) -> String {
    if let Some(title) = raw.metadata.get("title").filter(|t| !t.trim().is_empty()) {
        return title.trim().to_string();
    }
    classify(markdown, 1)
        .into_iter()
        .find_map(|(line, l)| l.map(|l| heading_text(line, l).to_string()))
        .filter(|t| !t.is_empty())
        .unwrap_or_else(|| raw.id.clone())
}

fn trim_blank(lines: &[&str]) -> String {
    let start = lines.iter().position(|l| !l.trim().is_empty()).unwrap_or(lines.len());
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(start, |i| i + 1);
    lines[start..end].join("\n")
}

/// Splits `markdown` (the converted body of `doc`) into section records.
pub fn consolidate_sections(
    doc: &RawDocument,
    markdown: &str,
    options: &SectionOptions,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<CorpusRecord>, CorpusError> {
    let level = options.level.clamp(1, 6);
    let classified = classify(markdown, level);
    let title = document_title(doc, markdown);

    let mut preamble: Vec<&str> = Vec::new();
    let mut sections: Vec<(String, Vec<&str>)> = Vec::new();
    for (line, heading) in classified {
        match heading {
            Some(l) if l == level => sections.push((heading_text(line, l).to_string(), Vec::new())),
            Some(_) => {}
            None => match sections.last_mut() {
                Some((_, body)) => body.push(line),
                None => preamble.push(line),
            },
        }
    }

    if sections.is_empty() {
        if options.strict || markdown.trim().is_empty() {
            if options.strict {
                return Err(CorpusError::NoSections { id: doc.id.clone(), level });
            }
            return Ok(Vec::new());
        }
        return Ok(vec![CorpusRecord::new(
            format!("{}#sec0", doc.id),
            FormatKind::Section,
            markdown,
            vec![doc.id.clone()],
            tokenizer,
        )]);
    }

    let preamble = trim_blank(&preamble);
    let marker = "#".repeat(level);
    Ok(sections
        .into_iter()
        .enumerate()
        .map(|(i, (section_title, body))| {
            let mut body = trim_blank(&body);
            if i == 0 && !preamble.is_empty() {
                body = if body.is_empty() { preamble.clone() } else { format!("{preamble}\n\n{body}") };
            }
            let mut text = format!("# {title}\n{marker} {section_title}");
            if !body.is_empty() {
                text.push_str("\n\n");
                text.push_str(&body);
            }
            CorpusRecord::new(format!("{}#sec{i}", doc.id), FormatKind::Section, text, vec![doc.id.clone()], tokenizer)
        })
        .collect())
}
