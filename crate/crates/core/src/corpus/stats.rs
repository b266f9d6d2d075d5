use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, CorpusRecord, FormatKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub token_count: usize,
    /// Record count for each of the six formats, zeros included.
    pub per_format: BTreeMap<FormatKind, usize>,
    pub per_format_tokens: BTreeMap<FormatKind, usize>,
}

pub fn corpus_stats(records: &[CorpusRecord]) -> Result<CorpusStats, CorpusError> {
    let mut per_format: BTreeMap<FormatKind, usize> = FormatKind::ALL.iter().map(|&k| (k, 0)).collect();
    let mut per_format_tokens = per_format.clone();
    let mut token_count = 0;
    for rec in records {
        let tokens = rec.token_count.ok_or_else(|| CorpusError::MissingTokenCounts(rec.id.clone()))?;
        token_count += tokens;
        *per_format.get_mut(&rec.format_kind).expect("all formats present") += 1;
        *per_format_tokens.get_mut(&rec.format_kind).expect("all formats present") += tokens;
    }
    Ok(CorpusStats { doc_count: records.len(), token_count, per_format, per_format_tokens })
}
