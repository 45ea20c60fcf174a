//! Per-feature training statistics used by the neighbourhood sampler.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::schema::FeatureKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default number of quantile bins (quartiles).
pub const DEFAULT_QUANTILES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureStat {
    Numerical {
        mean: f64,
        std: f64,
        min: f64,
        max: f64,
        /// The `p - 1` interior cut points at levels `j / p`.
        boundaries: Vec<f64>,
        /// Constant column: quantile discretization is undefined.
        degenerate: bool,
    },
    Categorical {
        frequencies: Vec<f64>,
    },
}

impl FeatureStat {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, FeatureStat::Numerical { degenerate: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub quantiles: usize,
    pub features: Vec<FeatureStat>,
}

impl FeatureStats {
    pub fn degenerate_features(&self) -> Vec<usize> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_degenerate())
            .map(|(j, _)| j)
            .collect()
    }
}

/// Linear-interpolation sample quantile of already sorted data (numpy's
/// default rule): position `q * (n - 1)` between order statistics.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: T) -> T {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q * T::from_usize_lossy(sorted.len() - 1);
    let lo = pos.floor();
    let lo_i = lo.to_usize().unwrap().min(sorted.len() - 1);
    let hi_i = (lo_i + 1).min(sorted.len() - 1);
    let frac = pos - lo;
    sorted[lo_i] + (sorted[hi_i] - sorted[lo_i]) * frac
}

/// `p - 1` interior cut points at levels `1/p, ..., (p-1)/p`.
pub fn quantile_boundaries<T: Scalar>(values: &[T], p: usize) -> Vec<T> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in feature column"));
    let p_t = T::from_usize_lossy(p);
    (1..p)
        .map(|j| quantile_sorted(&sorted, T::from_usize_lossy(j) / p_t))
        .collect()
}

/// Population mean and standard deviation.
pub fn mean_std<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

pub fn compute_stats(train: &Dataset, p_quantiles: usize) -> Result<FeatureStats> {
    if train.is_empty() {
        return Err(Error::argument("statistics need a non-empty training set"));
    }
    if p_quantiles < 2 {
        return Err(Error::argument(format!("need at least 2 quantiles, got {p_quantiles}")));
    }
    let n = train.n_rows() as f64;
    let features = train
        .schema()
        .features()
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let col: Vec<f64> = train.column(j).collect();
            match f.kind {
                FeatureKind::Numerical => {
                    let (mean, std) = mean_std(&col);
                    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let degenerate = min == max;
                    let boundaries = if degenerate {
                        vec![min; p_quantiles - 1]
                    } else {
                        quantile_boundaries(&col, p_quantiles)
                    };
                    FeatureStat::Numerical {
                        mean,
                        std,
                        min,
                        max,
                        boundaries,
                        degenerate,
                    }
                }
                FeatureKind::Categorical => {
                    let mut counts = vec![0usize; f.cardinality()];
                    for v in &col {
                        counts[*v as usize] += 1;
                    }
                    FeatureStat::Categorical {
                        frequencies: counts.into_iter().map(|c| c as f64 / n).collect(),
                    }
                }
            }
        })
        .collect();
    Ok(FeatureStats {
        quantiles: p_quantiles,
        features,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::data::schema::{Feature, FeatureSchema};

    /// Brute-force quantile: walk the sorted list to find the bracketing
    /// order statistics for rank `q (n - 1)`.
    fn quantile_oracle(values: &[f64], q: f64) -> f64 {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = q * (s.len() - 1) as f64;
        for i in 0..s.len() {
            if (i as f64) <= rank && rank <= (i + 1) as f64 && i + 1 < s.len() {
                return s[i] * ((i + 1) as f64 - rank) + s[i + 1] * (rank - i as f64);
            }
        }
        *s.last().unwrap()
    }

    fn one_col(kind_cat: bool, vals: &[f64]) -> Dataset {
        let f = if kind_cat {
            Feature::categorical("c", vec!["a".into(), "b".into()])
        } else {
            Feature::numerical("x")
        };
        let schema = Arc::new(FeatureSchema::new(vec![f], "y", ["0".into(), "1".into()]).unwrap());
        let rows = vals.iter().map(|&v| vec![v]).collect();
        Dataset::new(schema, rows, vec![0; vals.len()]).unwrap()
    }

    #[test]
    fn quartiles_of_one_to_eight() {
        let vals: Vec<f64> = (1..=8).map(f64::from).collect();
        let expected: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&q| quantile_oracle(&vals, q)).collect();
        assert_eq!(expected, vec![2.75, 4.5, 6.25]);
        let s = compute_stats(&one_col(false, &vals), 4).unwrap();
        match &s.features[0] {
            FeatureStat::Numerical {
                boundaries, degenerate, ..
            } => {
                assert_eq!(boundaries, &expected);
                assert!(!degenerate);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn categorical_frequencies() {
        let s = compute_stats(&one_col(true, &[0.0, 0.0, 1.0, 1.0]), 4).unwrap();
        assert_eq!(
            s.features[0],
            FeatureStat::Categorical {
                frequencies: vec![0.5, 0.5]
            }
        );
    }

    #[test]
    fn constant_column_flagged() {
        let s = compute_stats(&one_col(false, &[3.0; 5]), 4).unwrap();
        assert!(s.features[0].is_degenerate());
        assert_eq!(s.degenerate_features(), vec![0]);
    }

    #[test]
    fn argument_checks() {
        assert!(compute_stats(&one_col(false, &[1.0]), 1).is_err());
        assert!(compute_stats(&one_col(false, &[]), 4).is_err());
    }

    #[test]
    fn f32_quantiles() {
        let v: Vec<f32> = (1..=8).map(|i| i as f32).collect();
        assert_eq!(quantile_boundaries(&v, 4), vec![2.75f32, 4.5, 6.25]);
    }

    proptest! {
        #[test]
        fn boundaries_monotone_order_invariant_and_match_oracle(
            mut vals in prop::collection::vec(-1e3f64..1e3, 1..60),
            p in 2usize..8,
        ) {
            let b = quantile_boundaries(&vals, p);
            prop_assert!(b.windows(2).all(|w| w[0] <= w[1]));
            for (j, &q) in b.iter().enumerate() {
                let o = quantile_oracle(&vals, (j + 1) as f64 / p as f64);
                prop_assert!((q - o).abs() <= 1e-9 * (1.0 + o.abs()));
            }
            vals.reverse();
            prop_assert_eq!(quantile_boundaries(&vals, p), b);
        }

        #[test]
        fn frequencies_sum_to_one(codes in prop::collection::vec(0u8..2, 1..50)) {
            let vals: Vec<f64> = codes.iter().map(|&c| f64::from(c)).collect();
            let s = compute_stats(&one_col(true, &vals), 4).unwrap();
            if let FeatureStat::Categorical { frequencies } = &s.features[0] {
                prop_assert!((frequencies.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}
