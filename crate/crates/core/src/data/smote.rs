//! Synthetic minority oversampling.
//!
//! Neighbours are searched among minority rows with a mixed metric: numerical
//! columns are scaled by the minority standard deviation and compared with
//! squared Euclidean distance; each categorical mismatch adds 1. Synthetic
//! numerical values interpolate between a seed row and one of its `k` nearest
//! neighbours; categorical values are copied from the seed row.

use rand::Rng as _;
use rayon::prelude::*;

use super::dataset::Dataset;
use super::stats::mean_std;
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_K_NEIGHBORS: usize = 5;

pub fn smote_oversample(train: &Dataset, k_neighbors: usize, seed: u64) -> Result<Dataset> {
    let counts = train.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::Balance(format!(
            "SMOTE needs both classes, got counts {counts:?}"
        )));
    }
    if counts[0] == counts[1] {
        return Ok(train.clone());
    }
    let minority_label: u8 = if counts[1] < counts[0] { 1 } else { 0 };
    let minority: Vec<usize> = (0..train.n_rows())
        .filter(|&i| train.labels()[i] == minority_label)
        .collect();
    let m = minority.len();
    if k_neighbors == 0 || m <= k_neighbors {
        return Err(Error::argument(format!(
            "minority class has {m} rows; needs more than k_neighbors = {k_neighbors}"
        )));
    }
    let needed = counts[0].max(counts[1]) - m;

    let schema = train.schema();
    let numeric: Vec<usize> = (0..schema.n_features())
        .filter(|&j| !schema.feature(j).is_categorical())
        .collect();
    let categorical: Vec<usize> = (0..schema.n_features())
        .filter(|&j| schema.feature(j).is_categorical())
        .collect();
    let scale: Vec<f64> = numeric
        .iter()
        .map(|&j| {
            let col: Vec<f64> = minority.iter().map(|&i| train.row(i)[j]).collect();
            let (_, sd) = mean_std(&col);
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();

    let distance = |a: &[f64], b: &[f64]| -> f64 {
        let num: f64 = numeric
            .iter()
            .zip(&scale)
            .map(|(&j, s)| {
                let t = (a[j] - b[j]) / s;
                t * t
            })
            .sum();
        let cat = categorical.iter().filter(|&&j| a[j] != b[j]).count() as f64;
        num + cat
    };

    let neighbors: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let ra = train.row(minority[a]);
            let mut cand: Vec<(f64, usize)> = (0..m)
                .filter(|&b| b != a)
                .map(|b| (distance(ra, train.row(minority[b])), b))
                .collect();
            let by = |x: &(f64, usize), y: &(f64, usize)| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1));
            cand.select_nth_unstable_by(k_neighbors - 1, by);
            cand.truncate(k_neighbors);
            cand.sort_by(by);
            cand.into_iter().map(|(_, b)| b).collect()
        })
        .collect();

    let mut rng = seed::rng(seed);
    let mut out = train.clone();
    let mut synth = vec![0.0; schema.n_features()];
    for _ in 0..needed {
        let a = rng.gen_range(0..m);
        let b = neighbors[a][rng.gen_range(0..k_neighbors)];
        let gap: f64 = rng.gen();
        let ra = train.row(minority[a]);
        let rb = train.row(minority[b]);
        synth.copy_from_slice(ra);
        for &j in &numeric {
            synth[j] = ra[j] + gap * (rb[j] - ra[j]);
        }
        out.push_row(&synth, minority_label);
    }
    Ok(out)
}
