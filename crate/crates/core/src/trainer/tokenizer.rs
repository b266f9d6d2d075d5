//! Tokenizers. The default is byte-level: one id per UTF-8 byte.

/// Text to token-id encoder.
pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;
    fn vocab_size(&self) -> usize;
    fn encode(&self, text: &str) -> Vec<u32>;
    fn decode(&self, ids: &[u32]) -> String;
    /// Id reserved for end-of-text, if the vocabulary has one.
    fn eot_id(&self) -> Option<u32> {
        None
    }
}

/// Byte-level tokenizer with 256 byte ids plus one end-of-text id.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ByteTokenizer;

impl ByteTokenizer {
    pub const EOT: u32 = 256;
    pub const VOCAB_SIZE: usize = 257;
}

impl Tokenizer for ByteTokenizer {
    fn name(&self) -> &str {
        "byte"
    }

    fn vocab_size(&self) -> usize {
        Self::VOCAB_SIZE
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        text.bytes().map(u32::from).collect()
    }

    /// Ids outside the byte range are dropped; invalid UTF-8 is replaced.
    fn decode(&self, ids: &[u32]) -> String {
        let bytes: Vec<u8> = ids
            .iter()
            .filter_map(|&id| u8::try_from(id).ok())
            .collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }

    fn eot_id(&self) -> Option<u32> {
        Some(Self::EOT)
    }
}

/// Looks up a tokenizer by its configured name.
pub fn tokenizer_by_name(name: &str) -> Option<Box<dyn Tokenizer>> {
    match name {
        "byte" => Some(Box::new(ByteTokenizer)),
        _ => None,
    }
}
