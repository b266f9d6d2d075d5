//! Reference training loop: epochs of SGD over packed sequences with the
//! linear-to-zero schedule, one loss-curve entry per step.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::trainer::curve::LossCurve;
use crate::trainer::model::{training_pairs, TinyLm, TokenPair};
use crate::trainer::pack::PackedSequence;
use crate::trainer::plan::{PlanError, TrainPlan};
use crate::trainer::schedule::{lr_at, total_steps};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("no packed sequences to train on")]
    EmptyData,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("token id {token} outside vocabulary of size {vocab_size}")]
    TokenOutOfVocab { token: u32, vocab_size: usize },
    #[error("non-finite loss {loss} at step {step}")]
    NonFiniteLoss { step: u64, loss: f64 },
}

/// Desk-scale settings that have no counterpart in the full-scale plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceSettings {
    pub vocab_size: usize,
    pub dim: usize,
    pub init_scale: f64,
    /// Skip predictions that cross a document boundary inside a sequence.
    pub mask_cross_document: bool,
    /// Reshuffle sequence order every epoch using the run seed.
    pub shuffle: bool,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        Self {
            vocab_size: crate::ByteTokenizer::VOCAB_SIZE,
            dim: 8,
            init_scale: 0.02,
            mask_cross_document: false,
            shuffle: false,
        }
    }
}

/// Trains a fresh [`TinyLm`] on `packed`.
///
/// Step `s` (0-based) updates with `lr_at(s)` and is recorded as step `s + 1`
/// with the post-update rate `lr_at(s + 1)`, so the final entry reads lr = 0.
/// The recorded loss is the batch loss before the update.
pub fn train_reference(
    packed: &[PackedSequence],
    plan: &TrainPlan,
    settings: &ReferenceSettings,
    seed: u64,
) -> Result<(TinyLm, LossCurve), TrainError> {
    let model = TinyLm::new(settings.vocab_size, settings.dim, settings.init_scale, seed);
    train_from(model, packed, plan, settings, seed)
}

/// Same loop as [`train_reference`] starting from existing parameters.
pub fn train_from(
    mut model: TinyLm,
    packed: &[PackedSequence],
    plan: &TrainPlan,
    settings: &ReferenceSettings,
    seed: u64,
) -> Result<(TinyLm, LossCurve), TrainError> {
    plan.validate_shape()?;
    if packed.is_empty() {
        return Err(TrainError::EmptyData);
    }
    for seq in packed {
        if let Some(&token) = seq.non_pad_tokens().iter().find(|&&t| t as usize >= model.vocab_size) {
            return Err(TrainError::TokenOutOfVocab { token, vocab_size: model.vocab_size });
        }
    }

    let pairs: Vec<Vec<TokenPair>> = packed
        .iter()
        .map(|seq| training_pairs(seq, settings.mask_cross_document))
        .collect();
    let total = total_steps(packed.len(), plan.global_batch, plan.epochs);
    let mut order: Vec<usize> = (0..packed.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_da7a);
    let mut curve = LossCurve::default();
    let mut step = 0u64;
    let mut batch_pairs: Vec<TokenPair> = Vec::new();

    for _epoch in 0..plan.epochs {
        if settings.shuffle {
            order.shuffle(&mut rng);
        }
        for batch in order.chunks(plan.global_batch) {
            batch_pairs.clear();
            for &i in batch {
                batch_pairs.extend_from_slice(&pairs[i]);
            }
            let (loss, grads) = model.loss_and_gradients(&batch_pairs);
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { step: step + 1, loss });
            }
            let lr = lr_at(step, total, plan.lr_init).expect("step within schedule");
            model.apply_sgd(&grads, lr);
            step += 1;
            let lr_next = lr_at(step, total, plan.lr_init).expect("step within schedule");
            curve.push(step, lr_next, loss);
        }
    }
    Ok((model, curve))
}

/// Mean of recorded losses for each epoch.
pub fn epoch_mean_losses(curve: &LossCurve, steps_per_epoch: usize) -> Vec<f64> {
    if steps_per_epoch == 0 {
        return Vec::new();
    }
    curve
        .entries
        .chunks(steps_per_epoch)
        .map(|c| c.iter().map(|e| e.loss).sum::<f64>() / c.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::pack::{pack_sequences, PackPolicy};
    use crate::trainer::plan::DeviceSpec;

    fn small_plan(lr: f64, epochs: usize) -> TrainPlan {
        TrainPlan {
            devices: DeviceSpec { model: "cpu".into(), count: 1 },
            lr_init: lr,
            epochs,
            global_batch: 2,
            per_device_batch: 2,
            max_seq_len: 16,
            ..TrainPlan::default()
        }
    }

    fn data() -> Vec<PackedSequence> {
        let docs: Vec<Vec<u32>> = (0..7)
            .map(|d| (0..20).map(|i| ((i * 3 + d) % 11) as u32).collect())
            .collect();
        pack_sequences(&docs, &PackPolicy::new(16))
    }

    fn settings() -> ReferenceSettings {
        ReferenceSettings { vocab_size: 12, dim: 4, init_scale: 0.1, ..ReferenceSettings::default() }
    }

    #[test]
    fn final_lr_is_zero_and_steps_are_counted() {
        let packed = data();
        let (_, curve) = train_reference(&packed, &small_plan(0.5, 3), &settings(), 1).unwrap();
        let per_epoch = packed.len().div_ceil(2);
        assert_eq!(curve.len(), 3 * per_epoch);
        assert_eq!(curve.entries.last().unwrap().lr, 0.0);
        assert!(curve.entries.windows(2).all(|w| w[1].lr <= w[0].lr && w[1].step > w[0].step));
    }

    #[test]
    fn zero_lr_leaves_parameters_unchanged() {
        let packed = data();
        let init = TinyLm::new(12, 4, 0.1, 9);
        let (model, curve) = train_from(init.clone(), &packed, &small_plan(0.0, 2), &settings(), 9).unwrap();
        assert_eq!(model, init);
        let per_epoch = packed.len().div_ceil(2);
        let losses = curve.losses();
        assert_eq!(losses[..per_epoch], losses[per_epoch..]);
    }

    #[test]
    fn zero_lr_single_batch_curve_is_flat() {
        let packed = data();
        let plan = TrainPlan { global_batch: 16, per_device_batch: 16, ..small_plan(0.0, 4) };
        let (_, curve) = train_reference(&packed[..3], &plan, &settings(), 2).unwrap();
        assert!(curve.losses().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn deterministic_given_seed() {
        let packed = data();
        let s = ReferenceSettings { shuffle: true, ..settings() };
        let a = train_reference(&packed, &small_plan(0.5, 3), &s, 4).unwrap();
        let b = train_reference(&packed, &small_plan(0.5, 3), &s, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.to_csv(), b.1.to_csv());
    }

    #[test]
    fn loss_decreases_with_real_learning_rate() {
        let packed = data();
        let (_, curve) = train_reference(&packed, &small_plan(1.0, 5), &settings(), 4).unwrap();
        let means = epoch_mean_losses(&curve, packed.len().div_ceil(2));
        assert!(means.last().unwrap() < means.first().unwrap());
    }

    #[test]
    fn non_finite_loss_reports_step() {
        let packed = data();
        let mut model = TinyLm::new(12, 4, 0.1, 0);
        model.bias[0] = f64::NAN;
        let err = train_from(model, &packed, &small_plan(0.5, 1), &settings(), 0).unwrap_err();
        assert!(matches!(err, TrainError::NonFiniteLoss { step: 1, .. }));
    }

    #[test]
    fn rejects_tokens_outside_vocab() {
        let packed = pack_sequences(&[vec![1u32, 50]], &PackPolicy::new(4));
        let err = train_reference(&packed, &small_plan(0.5, 1), &settings(), 0).unwrap_err();
        assert_eq!(err, TrainError::TokenOutOfVocab { token: 50, vocab_size: 12 });
    }

    #[test]
    fn empty_data_is_an_error() {
        assert_eq!(train_reference(&[], &small_plan(0.5, 1), &settings(), 0), Err(TrainError::EmptyData));
    }
}
