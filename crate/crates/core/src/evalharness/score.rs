use serde::{Deserialize, Serialize};

use crate::evalharness::{EvalError, Polarity};

/// A task's score. `stderr` is the binomial standard error and is set for
/// accuracy only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Micro,
    Macro,
}

fn check_lengths(preds: usize, golds: usize) -> Result<(), EvalError> {
    if preds != golds {
        return Err(EvalError::LengthMismatch { preds, golds });
    }
    if golds == 0 {
        return Err(EvalError::EmptyInput("no items to score"));
    }
    Ok(())
}

/// Fraction correct with stderr `sqrt(p(1-p)/n)`. Abstentions are wrong.
pub fn score_accuracy(preds: &[Option<usize>], golds: &[usize]) -> Result<TaskScore, EvalError> {
    check_lengths(preds.len(), golds.len())?;
    let n = golds.len();
    let correct = preds.iter().zip(golds).filter(|(p, g)| **p == Some(**g)).count();
    let value = correct as f64 / n as f64;
    let stderr = (value * (1.0 - value) / n as f64).sqrt();
    Ok(TaskScore { value, stderr: Some(stderr), n })
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// F1 over the three polarities. An abstention predicts a null class that
/// never matches, so it costs recall without adding a false positive. Macro
/// averages over the polarities present in either the golds or the
/// predictions.
pub fn score_f1(preds: &[Option<Polarity>], golds: &[Polarity], averaging: Averaging) -> Result<TaskScore, EvalError> {
    check_lengths(preds.len(), golds.len())?;
    let mut tp = [0usize; 3];
    let mut fp = [0usize; 3];
    let mut fn_ = [0usize; 3];
    let idx = |p: Polarity| Polarity::ALL.iter().position(|&q| q == p).expect("known polarity");
    for (pred, &gold) in preds.iter().zip(golds) {
        match pred {
            Some(p) if *p == gold => tp[idx(gold)] += 1,
            Some(p) => {
                fp[idx(*p)] += 1;
                fn_[idx(gold)] += 1;
            }
            None => fn_[idx(gold)] += 1,
        }
    }
    let value = match averaging {
        Averaging::Micro => f1(tp.iter().sum(), fp.iter().sum(), fn_.iter().sum()),
        Averaging::Macro => {
            let present: Vec<usize> = (0..3).filter(|&c| tp[c] + fp[c] + fn_[c] > 0).collect();
            present.iter().map(|&c| f1(tp[c], fp[c], fn_[c])).sum::<f64>() / present.len() as f64
        }
    };
    Ok(TaskScore { value, stderr: None, n: golds.len() })
}
