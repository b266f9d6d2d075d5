//! Parser for the generator layout written by [`crate::corpus::render::synthetic_text`].
//!
//! Items start at a `Q:` line. Q&A items end with an `A:` answer (which may
//! continue on following lines until a blank line); multiple-choice items list
//! `(n) choice` lines numbered from 1 and end with `A: (n) text`. Text before
//! the first `Q:` is ignored. Incomplete or inconsistent items are dropped and
//! counted.

use std::sync::LazyLock;

use regex::Regex;

use crate::corpus::{McqItem, QaPair, SynthItem};
use crate::synthgen::{ItemKind, SynthError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub items: Vec<SynthItem>,
    pub dropped: usize,
}

static QUESTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:Q|Question)\s*[:：]\s*(.*)$").unwrap());
static ANSWER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:A|Answer)\s*[:：]\s*(.*)$").unwrap());
static CHOICE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[(（]\s*([0-9０-９]+)\s*[)）]|([0-9０-９]+)[.)．])\s*(.*)$").unwrap());
static ANSWER_LABEL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[(（]\s*([0-9０-９]+)\s*[)）][.．]?\s*|([0-9０-９]+)[.．)）]?(?:\s+|$))(.*)$").unwrap());

pub(crate) fn parse_label_number(digits: &str) -> Option<usize> {
    let ascii: String = digits
        .chars()
        .map(|c| match c {
            '０'..='９' => char::from_digit(c as u32 - '０' as u32, 10).expect("digit"),
            c => c,
        })
        .collect();
    ascii.parse().ok()
}

#[derive(Default)]
struct Draft {
    question: Vec<String>,
    choices: Vec<(Option<usize>, String)>,
    answer: Option<Vec<String>>,
    answer_closed: bool,
}

impl Draft {
    fn finish(self, kind: ItemKind) -> Option<SynthItem> {
        let question = self.question.join("\n").trim().to_string();
        let answer = self.answer?.join("\n").trim().to_string();
        if question.is_empty() || answer.is_empty() {
            return None;
        }
        match kind {
            ItemKind::Qa => Some(SynthItem::Qa(QaPair { question, answer })),
            ItemKind::Mcq => {
                let mut choices = Vec::with_capacity(self.choices.len());
                for (i, (label, text)) in self.choices.into_iter().enumerate() {
                    if label != Some(i + 1) {
                        return None;
                    }
                    choices.push(text.trim().to_string());
                }
                if choices.len() < 2 {
                    return None;
                }
                let answer_index = match ANSWER_LABEL.captures(&answer) {
                    Some(c) => {
                        let digits = c.get(1).or(c.get(2)).expect("one label group matches");
                        let idx = parse_label_number(digits.as_str())?.checked_sub(1)?;
                        let stated = c[3].trim();
                        if idx >= choices.len() || (!stated.is_empty() && stated != choices[idx]) {
                            return None;
                        }
                        idx
                    }
                    None => choices.iter().position(|c| *c == answer)?,
                };
                Some(SynthItem::Mcq(McqItem { question, choices, answer_index }))
            }
        }
    }
}

pub fn parse_generation(raw: &str, kind: ItemKind) -> Result<ParseOutcome, SynthError> {
    let mut items = Vec::new();
    let mut dropped = 0;
    let mut draft: Option<Draft> = None;
    let finish = |draft: Option<Draft>, items: &mut Vec<SynthItem>, dropped: &mut usize| {
        if let Some(d) = draft {
            match d.finish(kind) {
                Some(item) => items.push(item),
                None => *dropped += 1,
            }
        }
    };

    for line in raw.lines() {
        let line = line.trim();
        if let Some(c) = QUESTION.captures(line) {
            finish(draft.take(), &mut items, &mut dropped);
            draft = Some(Draft { question: vec![c[1].to_string()], ..Draft::default() });
            continue;
        }
        let Some(d) = draft.as_mut() else { continue };
        if let Some(c) = ANSWER.captures(line) {
            if d.answer.is_some() {
                // A second answer line makes the item ambiguous.
                d.question.clear();
            }
            d.answer = Some(vec![c[1].to_string()]);
            d.answer_closed = kind == ItemKind::Mcq;
            continue;
        }
        if line.is_empty() {
            if d.answer.is_some() {
                d.answer_closed = true;
            }
            continue;
        }
        if kind == ItemKind::Mcq && d.answer.is_none() {
            if let Some(c) = CHOICE.captures(line) {
                let label = c.get(1).or(c.get(2)).and_then(|m| parse_label_number(m.as_str()));
                d.choices.push((label, c[3].to_string()));
                continue;
            }
        }
        match (&mut d.answer, d.answer_closed) {
            (Some(answer), false) => answer.push(line.to_string()),
            (Some(_), true) => {}
            (None, _) if d.choices.is_empty() => d.question.push(line.to_string()),
            (None, _) => {
                if let Some((_, text)) = d.choices.last_mut() {
                    text.push(' ');
                    text.push_str(line);
                }
            }
        }
    }
    finish(draft.take(), &mut items, &mut dropped);

    if items.is_empty() {
        return Err(SynthError::NoItemsParsed { dropped });
    }
    Ok(ParseOutcome { items, dropped })
}
