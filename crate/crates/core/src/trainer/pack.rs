//! First-fit sequence packing.
//!
//! Documents are cut into chunks of at most `max_len` tokens, then each chunk
//! is placed into the first open sequence with enough room, in input order.
//! A sequence may hold several documents; `segment_boundaries` records where
//! each chunk starts.

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusRecord;
use crate::trainer::tokenizer::Tokenizer;

/// Format tag written in the header line of packed-data files.
pub const PACKED_FORMAT: &str = "fincpt-packed";
pub const PACKED_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedSequence {
    pub token_ids: Vec<u32>,
    pub segment_boundaries: Vec<usize>,
    pub pad_count: usize,
}

impl PackedSequence {
    pub fn non_pad_len(&self) -> usize {
        self.token_ids.len() - self.pad_count
    }

    pub fn non_pad_tokens(&self) -> &[u32] {
        &self.token_ids[..self.non_pad_len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackPolicy {
    pub max_len: usize,
    /// When set, every sequence is right-padded to `max_len` with this id.
    pub pad_id: Option<u32>,
}

impl PackPolicy {
    pub fn new(max_len: usize) -> Self {
        Self { max_len, pad_id: None }
    }

    pub fn padded(max_len: usize, pad_id: u32) -> Self {
        Self { max_len, pad_id: Some(pad_id) }
    }
}

/// Header line of a packed-data JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedHeader {
    pub format: String,
    pub version: u32,
    pub max_len: usize,
    pub pad_id: Option<u32>,
    pub sequences: usize,
    pub tokens: usize,
}

impl PackedHeader {
    pub fn describe(policy: &PackPolicy, packed: &[PackedSequence]) -> Self {
        Self {
            format: PACKED_FORMAT.to_string(),
            version: PACKED_FORMAT_VERSION,
            max_len: policy.max_len,
            pad_id: policy.pad_id,
            sequences: packed.len(),
            tokens: packed.iter().map(PackedSequence::non_pad_len).sum(),
        }
    }
}

/// Packs token documents into sequences of at most `policy.max_len` tokens.
///
/// # Panics
///
/// Panics if `policy.max_len` is zero.
pub fn pack_sequences<D: AsRef<[u32]>>(docs: &[D], policy: &PackPolicy) -> Vec<PackedSequence> {
    assert!(policy.max_len >= 1, "max_len must be at least 1");
    let max_len = policy.max_len;
    let mut open: Vec<PackedSequence> = Vec::new();
    // Sequences before this index are known to be full.
    let mut first_open = 0;

    for doc in docs {
        for chunk in doc.as_ref().chunks(max_len) {
            let slot = open[first_open..]
                .iter()
                .position(|seq| max_len - seq.token_ids.len() >= chunk.len())
                .map(|i| i + first_open);
            let seq = match slot {
                Some(i) => &mut open[i],
                None => {
                    open.push(PackedSequence {
                        token_ids: Vec::with_capacity(max_len),
                        segment_boundaries: Vec::new(),
                        pad_count: 0,
                    });
                    open.last_mut().expect("just pushed")
                }
            };
            seq.segment_boundaries.push(seq.token_ids.len());
            seq.token_ids.extend_from_slice(chunk);
            while first_open < open.len() && open[first_open].token_ids.len() == max_len {
                first_open += 1;
            }
        }
    }

    if let Some(pad_id) = policy.pad_id {
        for seq in &mut open {
            seq.pad_count = max_len - seq.token_ids.len();
            seq.token_ids.resize(max_len, pad_id);
        }
    }
    open
}

/// Tokenizes records and packs them. Records are processed in input order.
pub fn pack_records(
    records: &[CorpusRecord],
    tokenizer: &dyn Tokenizer,
    policy: &PackPolicy,
) -> Vec<PackedSequence> {
    let docs: Vec<Vec<u32>> = records.iter().map(|r| tokenizer.encode(&r.text)).collect();
    pack_sequences(&docs, policy)
}
