//! Loss-curve recording and analysis: spike detection and tail saturation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossCurve {
    pub entries: Vec<CurveEntry>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("curve has {len} entries, at least {needed} required")]
    CurveTooShort { len: usize, needed: usize },
    #[error("invalid analysis parameters: {0}")]
    InvalidParams(String),
    #[error("steps must be strictly increasing (entry {0})")]
    NonIncreasingStep(usize),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

pub const CSV_HEADER: &str = "step,lr,loss";

impl LossCurve {
    pub fn push(&mut self, step: u64, lr: f64, loss: f64) {
        self.entries.push(CurveEntry { step, lr, loss });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.loss).collect()
    }

    pub fn check_steps(&self) -> Result<(), CurveError> {
        match self.entries.windows(2).position(|w| w[1].step <= w[0].step) {
            Some(i) => Err(CurveError::NonIncreasingStep(i + 1)),
            None => Ok(()),
        }
    }

    /// CSV with header `step,lr,loss`. Floats use the shortest representation
    /// that parses back to the same value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.entries.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let _ = writeln!(out, "{},{:?},{:?}", e.step, e.lr, e.loss);
        }
        out
    }

    /// Parses CSV written by [`LossCurve::to_csv`]; `#` lines are comments.
    pub fn from_csv(text: &str) -> Result<Self, CurveError> {
        let mut curve = LossCurve::default();
        let mut saw_header = false;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line.trim() != CSV_HEADER {
                    return Err(CurveError::Csv { line: line_no, message: format!("expected header `{CSV_HEADER}`") });
                }
                saw_header = true;
                continue;
            }
            let bad = |message: String| CurveError::Csv { line: line_no, message };
            let mut parts = line.split(',');
            let (Some(step), Some(lr), Some(loss), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected three columns".into()));
            };
            curve.push(
                step.trim().parse().map_err(|_| bad(format!("bad step `{step}`")))?,
                lr.trim().parse().map_err(|_| bad(format!("bad lr `{lr}`")))?,
                loss.trim().parse().map_err(|_| bad(format!("bad loss `{loss}`")))?,
            );
        }
        curve.check_steps()?;
        Ok(curve)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeParams {
    /// Number of preceding losses whose median is the spike baseline.
    pub spike_window: usize,
    /// A loss above `spike_ratio * baseline` is a spike.
    pub spike_ratio: f64,
    /// Fraction of final entries used for the saturation slope.
    pub saturation_tail: f64,
    /// Saturated iff the absolute tail slope (loss per step) is below this.
    pub slope_tol: f64,
}

impl Default for AnalyzeParams {
    fn default() -> Self {
        Self { spike_window: 25, spike_ratio: 1.5, saturation_tail: 0.2, slope_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveAnalysis {
    /// Steps flagged as spikes.
    pub spikes: Vec<u64>,
    pub saturated: bool,
    pub tail_slope: f64,
}

pub fn analyze_curve(curve: &LossCurve, params: &AnalyzeParams) -> Result<CurveAnalysis, CurveError> {
    let w = params.spike_window;
    if w == 0 {
        return Err(CurveError::InvalidParams("spike_window must be at least 1".into()));
    }
    if !(params.saturation_tail > 0.0 && params.saturation_tail <= 1.0) {
        return Err(CurveError::InvalidParams("saturation_tail must be in (0, 1]".into()));
    }
    let n = curve.len();
    if n < w + 1 {
        return Err(CurveError::CurveTooShort { len: n, needed: w + 1 });
    }
    curve.check_steps()?;
    let losses = curve.losses();

    let spikes = (w..n)
        .filter(|&t| losses[t] > params.spike_ratio * median(&losses[t - w..t]))
        .map(|t| curve.entries[t].step)
        .collect();

    let tail_len = ((params.saturation_tail * n as f64).ceil() as usize).clamp(2, n);
    let tail = &curve.entries[n - tail_len..];
    let tail_slope = least_squares_slope(tail);
    Ok(CurveAnalysis { spikes, saturated: tail_slope.abs() < params.slope_tol, tail_slope })
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// Slope of the ordinary least-squares line of loss against step.
/// Values are shifted by the first entry so a constant tail gives exactly 0.
fn least_squares_slope(entries: &[CurveEntry]) -> f64 {
    let x0 = entries[0].step as f64;
    let y0 = entries[0].loss;
    let n = entries.len() as f64;
    let xs: Vec<f64> = entries.iter().map(|e| e.step as f64 - x0).collect();
    let ys: Vec<f64> = entries.iter().map(|e| e.loss - y0).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(losses: &[f64]) -> LossCurve {
        let mut c = LossCurve::default();
        for (i, &l) in losses.iter().enumerate() {
            c.push(i as u64, 1.0 - i as f64 / losses.len() as f64, l);
        }
        c
    }

    #[test]
    fn hand_evaluated_spike() {
        // median(2.0, 1.9, 1.8) = 1.9 and 2.6 > 1.25 * 1.9 = 2.375; the last
        // window median(1.9, 1.8, 2.6) = 1.9 and 1.7 is not a spike.
        let params = AnalyzeParams { spike_window: 3, spike_ratio: 1.25, ..AnalyzeParams::default() };
        let result = analyze_curve(&curve(&[2.0, 1.9, 1.8, 2.6, 1.7]), &params).unwrap();
        assert_eq!(result.spikes, vec![3]);
    }

    #[test]
    fn geometric_decay_has_no_spikes() {
        let losses: Vec<f64> = (0..100).map(|i| 5.0 * 0.97f64.powi(i)).collect();
        let result = analyze_curve(&curve(&losses), &AnalyzeParams::default()).unwrap();
        assert!(result.spikes.is_empty());
    }

    #[test]
    fn constant_tail_is_saturated() {
        let mut losses: Vec<f64> = (0..40).map(|i| 3.0 - 0.05 * i as f64).collect();
        losses.extend(std::iter::repeat(0.1).take(20));
        let result = analyze_curve(&curve(&losses), &AnalyzeParams::default()).unwrap();
        assert_eq!(result.tail_slope, 0.0);
        assert!(result.saturated);
    }

    #[test]
    fn descending_tail_is_not_saturated() {
        let losses: Vec<f64> = (0..60).map(|i| 3.0 - 0.01 * i as f64).collect();
        let result = analyze_curve(&curve(&losses), &AnalyzeParams::default()).unwrap();
        assert!((result.tail_slope + 0.01).abs() < 1e-9);
        assert!(!result.saturated);
    }

    #[test]
    fn too_short() {
        let err = analyze_curve(&curve(&[1.0; 25]), &AnalyzeParams::default()).unwrap_err();
        assert_eq!(err, CurveError::CurveTooShort { len: 25, needed: 26 });
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let c = curve(&[2.0, 1.0 / 3.0, 1e-300, 0.1 + 0.2]);
        let text = c.to_csv();
        assert!(text.starts_with("step,lr,loss\n"));
        let back = LossCurve::from_csv(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(matches!(LossCurve::from_csv("a,b,c\n"), Err(CurveError::Csv { line: 1, .. })));
    }
}
