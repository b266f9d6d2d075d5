//! Log-bilinear next-token model used as the desk-scale stand-in for a
//! full language model.
//!
//! The previous token is embedded (`embed[ctx]`, dimension `dim`) and scored
//! against every vocabulary entry: `logit[v] = out[v] · embed[ctx] + bias[v]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::trainer::pack::PackedSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyLm {
    pub vocab_size: usize,
    pub dim: usize,
    /// Row-major `vocab_size x dim` input embeddings.
    pub embed: Vec<f64>,
    /// Row-major `vocab_size x dim` output projection.
    pub out: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradient of the mean loss, shaped like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embed: Vec<f64>,
    pub out: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradients {
    fn zeros(model: &TinyLm) -> Self {
        Self {
            embed: vec![0.0; model.embed.len()],
            out: vec![0.0; model.out.len()],
            bias: vec![0.0; model.bias.len()],
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.embed.len() + self.out.len() + self.bias.len());
        v.extend_from_slice(&self.embed);
        v.extend_from_slice(&self.out);
        v.extend_from_slice(&self.bias);
        v
    }
}

/// One (context token, target token) training example.
pub type TokenPair = (u32, u32);

impl TinyLm {
    /// Parameters drawn uniformly from `[-init_scale, init_scale]`; bias starts at zero.
    pub fn new(vocab_size: usize, dim: usize, init_scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    if init_scale == 0.0 {
                        0.0
                    } else {
                        rng.random_range(-init_scale..=init_scale)
                    }
                })
                .collect()
        };
        let embed = draw(vocab_size * dim);
        let out = draw(vocab_size * dim);
        Self { vocab_size, dim, embed, out, bias: vec![0.0; vocab_size] }
    }

    pub fn parameter_count(&self) -> usize {
        self.embed.len() + self.out.len() + self.bias.len()
    }

    pub fn is_finite(&self) -> bool {
        self.embed.iter().chain(&self.out).chain(&self.bias).all(|x| x.is_finite())
    }

    fn embedding(&self, token: u32) -> &[f64] {
        let t = token as usize;
        &self.embed[t * self.dim..(t + 1) * self.dim]
    }

    /// Unnormalized scores for the token following `context`.
    pub fn logits(&self, context: u32) -> Vec<f64> {
        let h = self.embedding(context);
        self.out
            .chunks_exact(self.dim)
            .zip(&self.bias)
            .map(|(row, b)| dot(row, h) + b)
            .collect()
    }

    pub fn probabilities(&self, context: u32) -> Vec<f64> {
        softmax(&self.logits(context))
    }

    /// Mean cross-entropy over `pairs`; zero when `pairs` is empty.
    pub fn loss(&self, pairs: &[TokenPair]) -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let total: f64 = pairs
            .iter()
            .map(|&(ctx, target)| {
                let logits = self.logits(ctx);
                log_sum_exp(&logits) - logits[target as usize]
            })
            .sum();
        total / pairs.len() as f64
    }

    /// Mean cross-entropy and its analytic gradient.
    pub fn loss_and_gradients(&self, pairs: &[TokenPair]) -> (f64, Gradients) {
        let mut grads = Gradients::zeros(self);
        if pairs.is_empty() {
            return (0.0, grads);
        }
        let scale = 1.0 / pairs.len() as f64;
        let dim = self.dim;
        let mut total = 0.0;
        let mut dlogits = vec![0.0; self.vocab_size];
        let mut dh = vec![0.0; dim];
        for &(ctx, target) in pairs {
            let logits = self.logits(ctx);
            let lse = log_sum_exp(&logits);
            total += lse - logits[target as usize];
            for (d, l) in dlogits.iter_mut().zip(&logits) {
                *d = (l - lse).exp() * scale;
            }
            dlogits[target as usize] -= scale;

            let h = self.embedding(ctx);
            dh.iter_mut().for_each(|x| *x = 0.0);
            for (v, &g) in dlogits.iter().enumerate() {
                let row = &self.out[v * dim..(v + 1) * dim];
                let grow = &mut grads.out[v * dim..(v + 1) * dim];
                for k in 0..dim {
                    grow[k] += g * h[k];
                    dh[k] += g * row[k];
                }
                grads.bias[v] += g;
            }
            let c = ctx as usize;
            for (ge, d) in grads.embed[c * dim..(c + 1) * dim].iter_mut().zip(&dh) {
                *ge += d;
            }
        }
        (total * scale, grads)
    }

    /// Plain SGD update `theta -= lr * grad`.
    pub fn apply_sgd(&mut self, grads: &Gradients, lr: f64) {
        if lr == 0.0 {
            return;
        }
        for (p, g) in self.embed.iter_mut().zip(&grads.embed) {
            *p -= lr * g;
        }
        for (p, g) in self.out.iter_mut().zip(&grads.out) {
            *p -= lr * g;
        }
        for (p, g) in self.bias.iter_mut().zip(&grads.bias) {
            *p -= lr * g;
        }
    }

    /// Flat parameter view in the order embed, out, bias.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.parameter_count());
        v.extend_from_slice(&self.embed);
        v.extend_from_slice(&self.out);
        v.extend_from_slice(&self.bias);
        v
    }

    /// Mutable access to the `index`-th parameter of [`TinyLm::flatten`].
    pub fn parameter_mut(&mut self, index: usize) -> &mut f64 {
        let (e, o) = (self.embed.len(), self.out.len());
        if index < e {
            &mut self.embed[index]
        } else if index < e + o {
            &mut self.out[index - e]
        } else {
            &mut self.bias[index - e - o]
        }
    }
}

/// Next-token examples inside one packed sequence. Padding never contributes.
/// With `mask_cross_document`, the first token of each segment is not
/// predicted from the last token of the previous one.
pub fn training_pairs(seq: &PackedSequence, mask_cross_document: bool) -> Vec<TokenPair> {
    let tokens = seq.non_pad_tokens();
    let mut boundaries = seq.segment_boundaries.iter().peekable();
    let mut pairs = Vec::with_capacity(tokens.len().saturating_sub(1));
    for i in 1..tokens.len() {
        while boundaries.peek().is_some_and(|&&b| b < i) {
            boundaries.next();
        }
        if mask_cross_document && boundaries.peek() == Some(&&i) {
            continue;
        }
        pairs.push((tokens[i - 1], tokens[i]));
    }
    pairs
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn softmax(values: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(values);
    values.iter().map(|v| (v - lse).exp()).collect()
}
