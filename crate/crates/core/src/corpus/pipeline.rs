//! Raw documents to training records.
//!
//! Documents whose `metadata["schema"]` names a structured layout carry a JSON
//! array body and are rendered with the matching template:
//!
//! | schema         | body                      | records                 |
//! |----------------|---------------------------|-------------------------|
//! | `category`     | `[CategoryEntry]`         | one `category` each     |
//! | `company_list` | `[CompanyRow]`            | one `company_list`      |
//! | `synthetic`    | `[SynthItem]`             | one `qa` / `mcq` each   |
//!
//! Every other document is cleaned, converted to markdown, and optionally cut
//! into section records. Output is stably sorted by (source id, index within
//! the document) and then deduplicated.

use serde::{Deserialize, Serialize};

use crate::corpus::{
    consolidate_sections, dedupe, markdown::markdown_text, render_category, render_company_list, render_synthetic,
    CategoryEntry, CleaningConfig, CompanyRow, CorpusError, CorpusRecord, DedupeConfig, FormatKind, RawDocument,
    RenderConfig, SectionOptions, SynthItem, TextCleaner,
};
use crate::parallel::ordered_map;
use crate::trainer::tokenizer::Tokenizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormatOptions {
    pub cleaning: CleaningConfig,
    pub render: RenderConfig,
    /// `None` skips section-wise records.
    pub sections: Option<SectionOptions>,
    /// Emit the whole-document markdown record as well as sections.
    pub markdown: bool,
    /// `None` skips deduplication.
    pub dedupe: Option<DedupeConfig>,
    pub workers: usize,
}

impl Default for FormatOptions {
    fn default() -> Self {
        Self {
            cleaning: CleaningConfig::default(),
            render: RenderConfig::default(),
            sections: Some(SectionOptions::default()),
            markdown: true,
            dedupe: Some(DedupeConfig::default()),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatReport {
    pub documents: usize,
    /// `(document id, reason)` for documents that produced no records.
    pub skipped: Vec<(String, String)>,
    pub records_before_dedupe: usize,
    pub records: usize,
}

fn structured<T: serde::de::DeserializeOwned>(doc: &RawDocument) -> Result<Vec<T>, CorpusError> {
    serde_json::from_str(&doc.body)
        .map_err(|e| CorpusError::StructuredBody { id: doc.id.clone(), message: e.to_string() })
}

fn format_document(
    doc: &RawDocument,
    cleaner: &TextCleaner,
    options: &FormatOptions,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<CorpusRecord>, CorpusError> {
    let provenance = || vec![doc.id.clone()];
    match doc.metadata.get("schema").map(String::as_str) {
        Some("category") => structured::<CategoryEntry>(doc)?
            .iter()
            .enumerate()
            .map(|(i, e)| render_category(e, format!("{}#cat{i}", doc.id), provenance(), &options.render, tokenizer))
            .collect(),
        Some("company_list") => {
            let rows: Vec<CompanyRow> = structured(doc)?;
            Ok(vec![render_company_list(&rows, format!("{}#list", doc.id), provenance(), tokenizer)?])
        }
        Some("synthetic") => structured::<SynthItem>(doc)?
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let tag = match item {
                    SynthItem::Qa(_) => FormatKind::Qa,
                    SynthItem::Mcq(_) => FormatKind::Mcq,
                };
                render_synthetic(item, format!("{}#{tag}{i}", doc.id), provenance(), tokenizer)
            })
            .collect(),
        Some(other) => Err(CorpusError::StructuredBody { id: doc.id.clone(), message: format!("unknown schema `{other}`") }),
        None => {
            let cleaned = RawDocument { body: cleaner.clean(doc)?, ..doc.clone() };
            let markdown = markdown_text(&cleaned)?;
            if markdown.trim().is_empty() {
                return Err(CorpusError::EmptyAfterCleaning(doc.id.clone()));
            }
            let mut records = Vec::new();
            if options.markdown {
                records.push(CorpusRecord::new(format!("{}#md", doc.id), FormatKind::Markdown, markdown.clone(), provenance(), tokenizer));
            }
            if let Some(section_opts) = &options.sections {
                records.extend(consolidate_sections(doc, &markdown, section_opts, tokenizer)?);
            }
            Ok(records)
        }
    }
}

/// Formats every document. Per-document failures are reported, not fatal;
/// only configuration errors abort.
pub fn build_corpus(
    docs: &[RawDocument],
    options: &FormatOptions,
    tokenizer: &dyn Tokenizer,
) -> Result<(Vec<CorpusRecord>, FormatReport), CorpusError> {
    let cleaner = TextCleaner::new(&options.cleaning)?;
    options.render.code_regex()?;
    let results = ordered_map(docs, options.workers, |doc| format_document(doc, &cleaner, options, tokenizer));

    let mut report = FormatReport { documents: docs.len(), ..FormatReport::default() };
    let mut keyed: Vec<(String, usize, CorpusRecord)> = Vec::new();
    for (doc, result) in docs.iter().zip(results) {
        match result {
            Ok(records) if records.is_empty() => report.skipped.push((doc.id.clone(), "no records".into())),
            Ok(records) => keyed.extend(records.into_iter().enumerate().map(|(i, r)| (doc.id.clone(), i, r))),
            Err(e) => {
                log::warn!("skipping document {}: {e}", doc.id);
                report.skipped.push((doc.id.clone(), e.to_string()));
            }
        }
    }
    keyed.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    let records: Vec<CorpusRecord> = keyed.into_iter().map(|(_, _, r)| r).collect();
    report.records_before_dedupe = records.len();
    let records = match &options.dedupe {
        Some(cfg) => dedupe(&records, cfg),
        None => records,
    };
    report.records = records.len();
    Ok((records, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Mime, SourceKind};
    use crate::ByteTokenizer;

    fn doc(id: &str, mime: Mime, body: &str, schema: Option<&str>) -> RawDocument {
        let mut metadata = std::collections::BTreeMap::new();
        if let Some(s) = schema {
            metadata.insert("schema".into(), s.into());
        }
        RawDocument { id: id.into(), source_kind: SourceKind::Other, mime, uri: "u".into(), body: body.into(), metadata }
    }

    #[test]
    fn formats_all_layouts_in_id_order() {
        let docs = vec![
            doc("z-html", Mime::Html, "<h1>T</h1><h2>A</h2><p>alpha text</p><h2>B</h2><p>beta text</p>", None),
            doc("a-cat", Mime::Plain, r#"[{"name":"Banks","description":"d","stocks":[["MUFG","8306"]]}]"#, Some("category")),
            doc("m-list", Mime::Plain, r#"[{"name":"Toyota","code":"7203","industry":"Autos"}]"#, Some("company_list")),
            doc("q-syn", Mime::Plain, r#"[{"kind":"qa","question":"q?","answer":"a"}]"#, Some("synthetic")),
        ];
        let (records, report) = build_corpus(&docs, &FormatOptions::default(), &ByteTokenizer).unwrap();
        let ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["a-cat#cat0", "m-list#list", "q-syn#qa0", "z-html#md", "z-html#sec0", "z-html#sec1"]);
        assert!(report.skipped.is_empty());
        assert_eq!(records[4].text, "# T\n## A\n\nalpha text");
    }

    #[test]
    fn bad_documents_are_skipped() {
        let docs = vec![
            doc("bad", Mime::Unknown, "x", None),
            doc("cat", Mime::Plain, "not json", Some("category")),
            doc("ok", Mime::Plain, "fine", None),
        ];
        let (records, report) = build_corpus(&docs, &FormatOptions::default(), &ByteTokenizer).unwrap();
        assert_eq!(report.skipped.len(), 2);
        // The heading-less fallback section equals the markdown record and is deduplicated.
        assert_eq!(records.len(), 1);
    }

    #[test]
    fn parallel_matches_serial() {
        let docs: Vec<RawDocument> =
            (0..20).map(|i| doc(&format!("d{i:02}"), Mime::Plain, &format!("## s\nbody {i}"), None)).collect();
        let serial = build_corpus(&docs, &FormatOptions::default(), &ByteTokenizer).unwrap();
        let parallel = build_corpus(&docs, &FormatOptions { workers: 4, ..FormatOptions::default() }, &ByteTokenizer).unwrap();
        assert_eq!(serial, parallel);
    }
}
