//! Answer extraction from free-form generations. Abstentions are `None`.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::evalharness::Polarity;

/// ASCII alphanumeric runs, with decimals kept whole so `3.5` is not read as
/// label 3. Anything else, including CJK text, separates tokens.
static TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z0-9]+(?:[.,][0-9]+)*").expect("valid regex"));

fn nfkc(s: &str) -> String {
    s.nfkc().collect()
}

fn label_index(text: &str, start: usize, token: &str, n: usize) -> Option<usize> {
    if token.bytes().all(|b| b.is_ascii_digit()) {
        let value: usize = token.parse().ok()?;
        return (1..=n).contains(&value).then(|| value - 1);
    }
    let mut chars = token.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    let index = (c.to_ascii_lowercase() as usize).checked_sub('a' as usize)?;
    if index >= n {
        return None;
    }
    // Lowercase letters count only when bracketed, so the article "a" is not a label.
    let bracketed = text[..start].ends_with('(') || text[start + token.len()..].starts_with(')');
    (c.is_ascii_uppercase() || bracketed).then_some(index)
}

/// The chosen index: the first standalone label (`1`..`N` or `A`..), else
/// the choice whose text occurs earliest, else abstain. Full-width forms are
/// normalized first.
pub fn extract_choice(generation: &str, choices: &[String]) -> Option<usize> {
    let text = nfkc(generation);
    for m in TOKEN.find_iter(&text) {
        if let Some(i) = label_index(&text, m.start(), m.as_str(), choices.len()) {
            return Some(i);
        }
    }
    let mut best: Option<(usize, std::cmp::Reverse<usize>, usize)> = None;
    for (i, choice) in choices.iter().enumerate() {
        let choice = nfkc(choice);
        if choice.trim().is_empty() {
            continue;
        }
        if let Some(pos) = text.find(choice.as_str()) {
            let key = (pos, std::cmp::Reverse(choice.len()), i);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    best.map(|(_, _, i)| i)
}

/// Keyword lists per polarity, matched case-insensitively after
/// normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolarityKeywords {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub neutral: Vec<String>,
}

impl Default for PolarityKeywords {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        Self {
            positive: words(&["positive", "ポジティブ", "肯定"]),
            negative: words(&["negative", "ネガティブ", "否定"]),
            neutral: words(&["neutral", "ニュートラル", "中立"]),
        }
    }
}

impl PolarityKeywords {
    fn lists(&self) -> [(Polarity, &[String]); 3] {
        [(Polarity::Positive, &self.positive), (Polarity::Negative, &self.negative), (Polarity::Neutral, &self.neutral)]
    }
}

/// The polarity whose keyword occurs first; the longer keyword wins a tie.
pub fn extract_polarity(generation: &str, keywords: &PolarityKeywords) -> Option<Polarity> {
    let text = nfkc(generation).to_lowercase();
    let mut best: Option<(usize, std::cmp::Reverse<usize>, Polarity)> = None;
    for (polarity, words) in keywords.lists() {
        for word in words {
            let word = nfkc(word).to_lowercase();
            if word.is_empty() {
                continue;
            }
            if let Some(pos) = text.find(&word) {
                let key = (pos, std::cmp::Reverse(word.len()), polarity);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
    }
    best.map(|(_, _, p)| p)
}
