//! Exact and near-duplicate removal.
//!
//! Exact duplicates (identical text) are always dropped. Near duplicates are
//! detected by Jaccard similarity over character shingles of the normalized
//! text (lowercased, whitespace collapsed). A record is kept only if it is
//! below the threshold against every record kept before it, which makes the
//! operation idempotent.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DedupeConfig {
    /// `None` disables near-duplicate detection.
    pub near_duplicate_threshold: Option<f64>,
    /// Shingle width in characters.
    pub shingle_size: usize,
}

impl Default for DedupeConfig {
    fn default() -> Self {
        Self { near_duplicate_threshold: Some(0.9), shingle_size: 8 }
    }
}

fn normalize(text: &str) -> Vec<char> {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .chars()
        .flat_map(char::to_lowercase)
        .collect()
}

/// Hashed character shingles. Texts shorter than `size` yield one shingle.
pub fn shingles(text: &str, size: usize) -> HashSet<u64> {
    let chars = normalize(text);
    let size = size.max(1);
    let hash = |window: &[char]| {
        let s: String = window.iter().collect();
        crate::genbackend::mock::fnv1a(0, s.as_bytes())
    };
    if chars.len() <= size {
        return std::iter::once(hash(&chars)).collect();
    }
    chars.windows(size).map(hash).collect()
}

pub fn jaccard(a: &HashSet<u64>, b: &HashSet<u64>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

pub fn dedupe(records: &[CorpusRecord], config: &DedupeConfig) -> Vec<CorpusRecord> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut kept: Vec<CorpusRecord> = Vec::new();
    let mut kept_shingles: Vec<HashSet<u64>> = Vec::new();
    for rec in records {
        if !seen.insert(rec.text.as_str()) {
            continue;
        }
        if let Some(threshold) = config.near_duplicate_threshold {
            let sh = shingles(&rec.text, config.shingle_size);
            let near = kept_shingles.iter().any(|other| {
                let (small, large) = if sh.len() < other.len() { (sh.len(), other.len()) } else { (other.len(), sh.len()) };
                // |A ∩ B| / |A ∪ B| <= small / large
                (small as f64 / large as f64) >= threshold && jaccard(&sh, other) >= threshold
            });
            if near {
                continue;
            }
            kept_shingles.push(sh);
        }
        kept.push(rec.clone());
    }
    kept
}
