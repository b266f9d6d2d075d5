//! In-process backends for tests and offline runs.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::genbackend::{BackendError, GenerationBackend, GenerationConfig};

type Responder = dyn Fn(&str, &GenerationConfig) -> Result<String, BackendError> + Send + Sync;

/// A backend driven by a closure. Counts calls.
pub struct MockBackend {
    identity: String,
    responder: Box<Responder>,
    calls: AtomicUsize,
}

impl std::fmt::Debug for MockBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MockBackend")
            .field("identity", &self.identity)
            .field("calls", &self.calls())
            .finish()
    }
}

impl MockBackend {
    pub fn new<F>(identity: impl Into<String>, responder: F) -> Self
    where
        F: Fn(&str, &GenerationConfig) -> Result<String, BackendError> + Send + Sync + 'static,
    {
        Self { identity: identity.into(), responder: Box::new(responder), calls: AtomicUsize::new(0) }
    }

    /// Returns the prompt unchanged.
    pub fn echo(identity: impl Into<String>) -> Self {
        Self::new(identity, |prompt, _| Ok(prompt.to_string()))
    }

    pub fn fixed(identity: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Self::new(identity, move |_, _| Ok(text.clone()))
    }

    /// Fails every call as unavailable.
    pub fn failing(identity: impl Into<String>) -> Self {
        let identity = identity.into();
        let name = identity.clone();
        Self::new(identity, move |_, _| {
            Err(BackendError::Unavailable { backend: name.clone(), attempts: 1, reason: "mock is down".into() })
        })
    }

    /// Deterministic pseudo-text seeded by `(seed, prompt)`. Produces between
    /// `min_words` and `max_words` words drawn from `vocabulary`, truncated to
    /// `max_new_tokens` bytes.
    pub fn hashed(identity: impl Into<String>, seed: u64, min_words: usize, max_words: usize) -> Self {
        assert!(min_words <= max_words);
        Self::new(identity, move |prompt, config| {
            let mut state = fnv1a(seed, prompt.as_bytes());
            let span = (max_words - min_words + 1) as u64;
            let words = min_words + (splitmix(&mut state) % span) as usize;
            let mut out = String::new();
            for i in 0..words {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(VOCABULARY[(splitmix(&mut state) % VOCABULARY.len() as u64) as usize]);
            }
            if out.len() > config.max_new_tokens {
                let mut cut = config.max_new_tokens;
                while !out.is_char_boundary(cut) {
                    cut -= 1;
                }
                out.truncate(cut);
            }
            Ok(out)
        })
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl GenerationBackend for MockBackend {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn generate(&self, prompt: &str, config: &GenerationConfig) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        (self.responder)(prompt, config)
    }
}

const VOCABULARY: &[&str] = &[
    "the", "bank", "rate", "yen", "market", "policy", "inflation", "bond", "yield", "equity",
    "risk", "growth", "price", "demand", "credit", "liquidity", "outlook", "financial", "economy",
    "index", "stock", "dividend", "capital", "monetary", "easing", "tightening", "forecast",
];

/// FNV-1a over `bytes`, keyed by `seed`.
pub(crate) fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
