//! Conversion of raw documents to plain markdown.
//!
//! * HTML: headings become `#` headings, list items `-` (or `N.`) bullets,
//!   tables pipe tables, `pre` fenced blocks; scripts, styles and navigation
//!   are dropped.
//! * PDF text: hyphenated line breaks are joined and paragraphs reflowed;
//!   blank lines separate paragraphs.
//! * Wiki dumps: MediaWiki headings, lists and emphasis are translated, links
//!   reduced to their label, templates and references removed.
//! * Plain text passes through unchanged.

use std::sync::LazyLock;

use regex::Regex;
use scraper::{ElementRef, Html, Node};

use crate::corpus::{CorpusError, CorpusRecord, FormatKind, Mime, RawDocument};
use crate::trainer::tokenizer::Tokenizer;

pub fn to_markdown(raw: &RawDocument, tokenizer: &dyn Tokenizer) -> Result<CorpusRecord, CorpusError> {
    let text = markdown_text(raw)?;
    Ok(CorpusRecord::new(
        format!("{}#md", raw.id),
        FormatKind::Markdown,
        text,
        vec![raw.id.clone()],
        tokenizer,
    ))
}

/// The markdown body for `raw`, without wrapping it in a record.
pub fn markdown_text(raw: &RawDocument) -> Result<String, CorpusError> {
    match raw.mime {
        Mime::Html => Ok(html_to_markdown(&raw.body)),
        Mime::PdfText => Ok(reflow_pdf_text(&raw.body)),
        Mime::WikiDump => Ok(wiki_to_markdown(&raw.body)),
        Mime::Plain => Ok(raw.body.clone()),
        Mime::Unknown => Err(CorpusError::UnsupportedMime { id: raw.id.clone() }),
    }
}

// ---------------------------------------------------------------- HTML

pub fn html_to_markdown(html: &str) -> String {
    let doc = Html::parse_document(html);
    let mut blocks = Vec::new();
    render_blocks(doc.root_element(), &mut blocks, 0);
    blocks.join("\n\n")
}

const SKIPPED: &[&str] = &["script", "style", "nav", "head", "noscript", "template", "iframe", "footer"];

fn render_blocks(el: ElementRef<'_>, blocks: &mut Vec<String>, depth: usize) {
    let mut inline = String::new();
    for child in el.children() {
        match child.value() {
            Node::Text(t) => inline.push_str(t),
            Node::Element(e) => {
                let child_el = ElementRef::wrap(child).expect("element node");
                let name = e.name();
                if SKIPPED.contains(&name) {
                    continue;
                }
                if is_block(name) {
                    flush_paragraph(&mut inline, blocks);
                    render_block(child_el, name, blocks, depth);
                } else {
                    render_inline_element(child_el, &mut inline);
                }
            }
            _ => {}
        }
    }
    flush_paragraph(&mut inline, blocks);
}

fn is_block(name: &str) -> bool {
    matches!(
        name,
        "html" | "body" | "main" | "article" | "section" | "div" | "header" | "aside" | "p" | "h1" | "h2"
            | "h3" | "h4" | "h5" | "h6" | "ul" | "ol" | "table" | "pre" | "blockquote" | "hr" | "figure"
            | "dl" | "form" | "center" | "address"
    )
}

fn render_block(el: ElementRef<'_>, name: &str, blocks: &mut Vec<String>, depth: usize) {
    match name {
        "h1" | "h2" | "h3" | "h4" | "h5" | "h6" => {
            let level: usize = name[1..].parse().expect("heading level");
            let text = collapse(&render_inline(el));
            if !text.is_empty() {
                blocks.push(format!("{} {}", "#".repeat(level), text));
            }
        }
        "p" => {
            let text = collapse(&render_inline(el));
            if !text.is_empty() {
                blocks.push(text);
            }
        }
        "ul" | "ol" => {
            let mut lines = Vec::new();
            render_list(el, name == "ol", 0, &mut lines);
            if !lines.is_empty() {
                blocks.push(lines.join("\n"));
            }
        }
        "table" => {
            if let Some(table) = render_table(el) {
                blocks.push(table);
            }
        }
        "pre" => {
            let code: String = el.text().collect();
            let code = code.trim_matches('\n');
            if !code.is_empty() {
                blocks.push(format!("```\n{code}\n```"));
            }
        }
        "blockquote" => {
            let mut inner = Vec::new();
            render_blocks(el, &mut inner, depth + 1);
            if !inner.is_empty() {
                let quoted: Vec<String> = inner
                    .join("\n\n")
                    .lines()
                    .map(|l| if l.is_empty() { ">".to_string() } else { format!("> {l}") })
                    .collect();
                blocks.push(quoted.join("\n"));
            }
        }
        "hr" => blocks.push("---".to_string()),
        _ => render_blocks(el, blocks, depth + 1),
    }
}

fn render_list(list: ElementRef<'_>, ordered: bool, indent: usize, lines: &mut Vec<String>) {
    let mut n = 0;
    for child in list.children() {
        let Some(item) = ElementRef::wrap(child) else { continue };
        if item.value().name() != "li" {
            continue;
        }
        n += 1;
        let mut text = String::new();
        let mut nested = Vec::new();
        for part in item.children() {
            match part.value() {
                Node::Text(t) => text.push_str(t),
                Node::Element(e) if e.name() == "ul" || e.name() == "ol" => {
                    nested.push((ElementRef::wrap(part).expect("element"), e.name() == "ol"));
                }
                Node::Element(_) => render_inline_element(ElementRef::wrap(part).expect("element"), &mut text),
                _ => {}
            }
        }
        let marker = if ordered { format!("{n}.") } else { "-".to_string() };
        lines.push(format!("{}{} {}", "  ".repeat(indent), marker, collapse(&text)));
        for (sub, sub_ordered) in nested {
            render_list(sub, sub_ordered, indent + 1, lines);
        }
    }
}

fn render_table(table: ElementRef<'_>) -> Option<String> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    collect_rows(table, &mut rows);
    let width = rows.iter().map(Vec::len).max()?;
    if width == 0 {
        return None;
    }
    let mut lines = Vec::with_capacity(rows.len() + 1);
    for (i, row) in rows.iter().enumerate() {
        let mut cells = row.clone();
        cells.resize(width, String::new());
        lines.push(format!("| {} |", cells.join(" | ")));
        if i == 0 {
            lines.push(format!("|{}", " --- |".repeat(width)));
        }
    }
    Some(lines.join("\n"))
}

fn collect_rows(el: ElementRef<'_>, rows: &mut Vec<Vec<String>>) {
    for child in el.children() {
        let Some(child) = ElementRef::wrap(child) else { continue };
        match child.value().name() {
            "tr" => {
                let cells = child
                    .children()
                    .filter_map(ElementRef::wrap)
                    .filter(|c| matches!(c.value().name(), "td" | "th"))
                    .map(|c| collapse(&render_inline(c)).replace('|', "\\|"))
                    .collect();
                rows.push(cells);
            }
            "thead" | "tbody" | "tfoot" => collect_rows(child, rows),
            _ => {}
        }
    }
}

fn render_inline(el: ElementRef<'_>) -> String {
    let mut out = String::new();
    for child in el.children() {
        match child.value() {
            Node::Text(t) => out.push_str(t),
            Node::Element(_) => render_inline_element(ElementRef::wrap(child).expect("element node"), &mut out),
            _ => {}
        }
    }
    out
}

fn render_inline_element(el: ElementRef<'_>, out: &mut String) {
    let name = el.value().name();
    if SKIPPED.contains(&name) {
        return;
    }
    match name {
        "br" => out.push('\n'),
        "strong" | "b" => wrap_non_empty(out, &render_inline(el), "**"),
        "em" | "i" => wrap_non_empty(out, &render_inline(el), "*"),
        "code" => wrap_non_empty(out, &el.text().collect::<String>(), "`"),
        "img" => {}
        _ => out.push_str(&render_inline(el)),
    }
}

fn wrap_non_empty(out: &mut String, inner: &str, marker: &str) {
    let trimmed = inner.trim();
    if !trimmed.is_empty() {
        out.push_str(marker);
        out.push_str(trimmed);
        out.push_str(marker);
    }
}

fn flush_paragraph(inline: &mut String, blocks: &mut Vec<String>) {
    let text = collapse(inline);
    if !text.is_empty() {
        blocks.push(text);
    }
    inline.clear();
}

/// Whitespace collapse that keeps explicit `<br>` line breaks.
fn collapse(text: &str) -> String {
    text.split('\n')
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

// ---------------------------------------------------------------- PDF text

/// Joins hyphenated line breaks (`econ-\nomy` -> `economy`) and reflows the
/// lines of each paragraph into one line. Blank lines separate paragraphs.
pub fn reflow_pdf_text(text: &str) -> String {
    let mut paragraphs: Vec<String> = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                paragraphs.push(std::mem::take(&mut current));
            }
            continue;
        }
        join_line(&mut current, line);
    }
    if !current.is_empty() {
        paragraphs.push(current);
    }
    paragraphs.join("\n\n")
}

fn join_line(current: &mut String, line: &str) {
    if current.is_empty() {
        current.push_str(line);
        return;
    }
    let next_first = line.chars().next().expect("non-empty line");
    let mut tail = current.chars().rev();
    let last = tail.next().expect("non-empty paragraph");
    let before_last = tail.next();
    if last == '-' && before_last.is_some_and(char::is_alphabetic) && next_first.is_lowercase() {
        current.pop();
        current.push_str(line);
    } else if is_cjk(last) || is_cjk(next_first) {
        current.push_str(line);
    } else {
        current.push(' ');
        current.push_str(line);
    }
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3000..=0x303F | 0x3040..=0x30FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0xFF00..=0xFFEF)
}

// ---------------------------------------------------------------- wiki

static WIKI_HEADING: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(={1,6})\s*(.*?)\s*(={1,6})\s*$").unwrap());
static WIKI_LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\[(?:[^\]|]*\|)?([^\]]*)\]\]").unwrap());
static WIKI_EXT_LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[https?://[^\s\]]+\s*([^\]]*)\]").unwrap());
static WIKI_REF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)<ref[^>/]*/>|<ref[^>]*>.*?</ref>").unwrap());
static WIKI_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[a-zA-Z][^>]*>").unwrap());
static WIKI_BOLD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"'''(.+?)'''").unwrap());
static WIKI_ITALIC: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"''(.+?)''").unwrap());

pub fn wiki_to_markdown(text: &str) -> String {
    let without_templates = strip_templates(text);
    let without_refs = WIKI_REF.replace_all(&without_templates, "");
    let mut lines = Vec::new();
    for line in without_refs.lines() {
        let line = line.trim_end();
        let converted = if let Some(c) = WIKI_HEADING.captures(line) {
            let level = c[1].len().min(c[3].len());
            format!("{} {}", "#".repeat(level), inline_wiki(&c[2]))
        } else if let Some(rest) = line.strip_prefix(['*', '#']) {
            let marker = line.as_bytes()[0];
            let extra = rest.chars().take_while(|&c| c == '*' || c == '#').count();
            let body = rest[extra..].trim();
            let bullet = if marker == b'#' { "1." } else { "-" };
            format!("{}{} {}", "  ".repeat(extra), bullet, inline_wiki(body))
        } else {
            inline_wiki(line)
        };
        lines.push(converted);
    }
    let mut out = lines.join("\n");
    while out.contains("\n\n\n") {
        out = out.replace("\n\n\n", "\n\n");
    }
    out.trim().to_string()
}

fn inline_wiki(text: &str) -> String {
    let s = WIKI_LINK.replace_all(text, "$1");
    let s = WIKI_EXT_LINK.replace_all(&s, "$1");
    let s = WIKI_TAG.replace_all(&s, "");
    let s = WIKI_BOLD.replace_all(&s, "**$1**");
    let s = WIKI_ITALIC.replace_all(&s, "*$1*");
    s.trim().to_string()
}

/// Removes `{{...}}` templates, including nested ones.
fn strip_templates(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '{' && chars.peek() == Some(&'{') {
            chars.next();
            depth += 1;
        } else if c == '}' && depth > 0 && chars.peek() == Some(&'}') {
            chars.next();
            depth -= 1;
        } else if depth == 0 {
            out.push(c);
        }
    }
    out
}
