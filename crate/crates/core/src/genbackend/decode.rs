//! Logit processing and greedy decoding for the reference model.

use std::collections::BTreeSet;

use crate::genbackend::GenerationConfig;
use crate::trainer::model::TinyLm;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("token id {token} out of range for {len} logits")]
    DimensionMismatch { token: u32, len: usize },
}

/// Divides positive logits of seen tokens by `penalty` and multiplies
/// non-positive ones by it. Unseen logits are untouched, so the sign of a
/// logit never changes and `penalty = 1` is the identity.
pub fn apply_repetition_penalty(
    logits: &[f64],
    seen_tokens: &BTreeSet<u32>,
    penalty: f64,
) -> Result<Vec<f64>, DecodeError> {
    let mut out = logits.to_vec();
    for &token in seen_tokens {
        let slot = out
            .get_mut(token as usize)
            .ok_or(DecodeError::DimensionMismatch { token, len: logits.len() })?;
        if *slot > 0.0 {
            *slot /= penalty;
        } else {
            *slot *= penalty;
        }
    }
    Ok(out)
}

/// Keeps the `k` largest logits and sets the rest to negative infinity.
/// Among equal values the lower index is kept first.
pub fn top_k_filter(logits: &[f64], k: usize) -> Vec<f64> {
    if k >= logits.len() {
        return logits.to_vec();
    }
    let mut order: Vec<usize> = (0..logits.len()).collect();
    order.sort_by(|&a, &b| logits[b].total_cmp(&logits[a]).then(a.cmp(&b)));
    let mut out = vec![f64::NEG_INFINITY; logits.len()];
    for &i in &order[..k] {
        out[i] = logits[i];
    }
    out
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b].total_cmp(v).is_ge() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Greedy continuation of `prompt_ids`. Returns only the new tokens; stops
/// after `max_new_tokens` or once `eot` is produced (the end token is not
/// returned).
pub fn greedy_decode(model: &TinyLm, prompt_ids: &[u32], config: &GenerationConfig, eot: Option<u32>) -> Vec<u32> {
    let mut seen: BTreeSet<u32> = prompt_ids.iter().copied().collect();
    let mut generated = Vec::new();
    let Some(&final_prompt_token) = prompt_ids.last() else {
        return generated;
    };
    let mut last = final_prompt_token;
    for _ in 0..config.max_new_tokens {
        let logits = model.logits(last);
        let penalized = apply_repetition_penalty(&logits, &seen, config.repetition_penalty)
            .expect("seen tokens come from the model vocabulary");
        let filtered = top_k_filter(&penalized, config.top_k);
        let next = argmax(&filtered).expect("non-empty vocabulary") as u32;
        if Some(next) == eot {
            break;
        }
        generated.push(next);
        seen.insert(next);
        last = next;
    }
    generated
}
