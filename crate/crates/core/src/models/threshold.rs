//! F1-maximizing decision threshold.

use super::model::TrainedModel;
use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct Tuned {
    pub model: TrainedModel,
    pub f1: f64,
    /// The tuning set held a single class; the threshold was left at 0.5.
    pub single_class: bool,
}

/// `(threshold, f1)` for every candidate threshold: each distinct score in
/// `(0, 1)` plus 0.5. A row is positive when its score is `>= threshold`.
pub fn f1_curve(scores: &[f64], labels: &[u8]) -> Vec<(f64, f64)> {
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut curve = Vec::new();
    let mut include_half = true;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    let f1 = |tp: usize, fp: usize| {
        let denom = 2 * tp + fp + (positives - tp);
        if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    };
    while k < order.len() {
        let t = scores[order[k]];
        if include_half && t < DEFAULT_THRESHOLD {
            curve.push((DEFAULT_THRESHOLD, f1(tp, fp)));
            include_half = false;
        }
        while k < order.len() && scores[order[k]] == t {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        if t == DEFAULT_THRESHOLD {
            include_half = false;
        }
        if t > 0.0 && t < 1.0 {
            curve.push((t, f1(tp, fp)));
        }
    }
    if include_half {
        curve.push((DEFAULT_THRESHOLD, f1(tp, fp)));
    }
    curve
}

/// Best F1 threshold; ties go to the candidate nearest 0.5, then the lower one.
pub fn best_threshold(scores: &[f64], labels: &[u8]) -> (f64, f64) {
    f1_curve(scores, labels)
        .into_iter()
        .fold(None, |best: Option<(f64, f64)>, (t, f)| match best {
            None => Some((t, f)),
            Some((bt, bf)) => {
                let closer = (t - 0.5).abs() < (bt - 0.5).abs() || ((t - 0.5).abs() == (bt - 0.5).abs() && t < bt);
                if f > bf || (f == bf && closer) {
                    Some((t, f))
                } else {
                    Some((bt, bf))
                }
            }
        })
        .unwrap_or((DEFAULT_THRESHOLD, 0.0))
}

pub fn tune_threshold(m: TrainedModel, val: &Dataset) -> Result<Tuned> {
    if val.is_empty() {
        return Err(Error::argument("threshold tuning needs a non-empty set"));
    }
    let scores = m.predict_proba_batch(val.values());
    let counts = val.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        log::warn!("threshold tuning set holds a single class; keeping 0.5");
        return Ok(Tuned {
            model: m.with_threshold(DEFAULT_THRESHOLD),
            f1: 0.0,
            single_class: true,
        });
    }
    let (t, f1) = best_threshold(&scores, val.labels());
    Ok(Tuned {
        model: m.with_threshold(t),
        f1,
        single_class: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates every candidate and recounts predictions from scratch.
    fn oracle(scores: &[f64], labels: &[u8]) -> (f64, f64) {
        let mut cands: Vec<f64> = scores.iter().copied().filter(|&s| s > 0.0 && s < 1.0).collect();
        cands.push(0.5);
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        let mut best = (0.5, -1.0);
        for t in cands {
            let mut tp = 0.0;
            let mut fp = 0.0;
            let mut fnn = 0.0;
            for (&s, &l) in scores.iter().zip(labels) {
                match (s >= t, l == 1) {
                    (true, true) => tp += 1.0,
                    (true, false) => fp += 1.0,
                    (false, true) => fnn += 1.0,
                    _ => {}
                }
            }
            let f = if tp + fp + fnn == 0.0 {
                0.0
            } else {
                2.0 * tp / (2.0 * tp + fp + fnn)
            };
            let closer = (t - 0.5f64).abs() < (best.0 - 0.5f64).abs();
            if f > best.1 || (f == best.1 && closer) {
                best = (t, f);
            }
        }
        best
    }

    #[test]
    fn four_scores() {
        let (t, f) = best_threshold(&[0.1, 0.4, 0.6, 0.9], &[0, 0, 1, 1]);
        assert!(t > 0.4 && t <= 0.6);
        assert_eq!(f, 1.0);
        assert_eq!((t, f), oracle(&[0.1, 0.4, 0.6, 0.9], &[0, 0, 1, 1]));
    }

    #[test]
    fn constant_predictor_keeps_half() {
        let (t, _) = best_threshold(&[0.7; 6], &[0, 1, 0, 1, 1, 0]);
        assert_eq!(t, 0.5);
    }

    #[test]
    fn perfect_ranker_reaches_unit_f1() {
        let scores: Vec<f64> = (0..20).map(|i| 0.02 + i as f64 * 0.04).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 13)).collect();
        assert_eq!(best_threshold(&scores, &labels).1, 1.0);
    }

    #[test]
    fn sweep_matches_enumeration() {
        let mut rng = crate::seed::rng(3);
        use rand::Rng;
        for _ in 0..200 {
            let n = rng.gen_range(1..25);
            let scores: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..12) as f64) / 11.0).collect();
            let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            assert_eq!(best_threshold(&scores, &labels), oracle(&scores, &labels));
        }
    }
}
