use serde::{Deserialize, Serialize};

use super::model::TrainedModel;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let total = tp + fp + tn + fn_;
        let accuracy = if total == 0 {
            0.0
        } else {
            (tp + tn) as f64 / total as f64
        };
        let denom = 2 * tp + fp + fn_;
        let f1 = if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        };
        EvalReport {
            accuracy,
            f1,
            tp,
            fp,
            tn,
            fn_,
        }
    }

    pub fn from_predictions(predicted: &[u8], actual: &[u8]) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (1, 1) => tp += 1,
                (1, _) => fp += 1,
                (_, 1) => fn_ += 1,
                _ => tn += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }
}

/// Confusion counts of `m` on `test` at the model's own threshold.
pub fn evaluate(m: &TrainedModel, test: &Dataset) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::argument("cannot evaluate on an empty dataset"));
    }
    let predicted: Vec<u8> = m
        .predict_proba_batch(test.values())
        .into_iter()
        .map(|p| u8::from(p >= m.decision_threshold))
        .collect();
    Ok(EvalReport::from_predictions(&predicted, test.labels()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_formula() {
        let r = EvalReport::from_counts(3, 1, 4, 2);
        assert!((r.accuracy - 0.7).abs() < 1e-15);
        assert!((r.f1 - 6.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_all_wrong() {
        let y = [1, 0, 1, 1, 0];
        let perfect = EvalReport::from_predictions(&y, &y);
        assert_eq!((perfect.accuracy, perfect.f1), (1.0, 1.0));
        let flipped: Vec<u8> = y.iter().map(|v| 1 - v).collect();
        assert_eq!(EvalReport::from_predictions(&flipped, &y).accuracy, 0.0);
    }
}
