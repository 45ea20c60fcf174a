//! Association between features: |Pearson r| for two numerical columns,
//! Cramér's V whenever a categorical column is involved. Numerical columns
//! paired with a categorical one are binned into quartiles first.

use super::dataset::Dataset;
use super::stats::{mean_std, quantile_boundaries, DEFAULT_QUANTILES};
use crate::error::Result;
use crate::scalar::Scalar;

/// Default association threshold above which a feature is a companion.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.85;

const ASSOCIATION_SLACK: f64 = 1e-12;

pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> T {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if sa == T::zero() || sb == T::zero() {
        return T::zero();
    }
    let n = T::from_usize_lossy(a.len());
    let cov = a.iter().zip(b).map(|(&x, &y)| (x - ma) * (y - mb)).sum::<T>() / n;
    (cov / (sa * sb)).max(-T::one()).min(T::one())
}

/// Cramér's V (no bias correction) between two code sequences.
pub fn cramers_v(a: &[usize], b: &[usize]) -> f64 {
    let ra = a.iter().max().map_or(0, |m| m + 1);
    let rb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0usize; ra * rb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * rb + y] += 1;
    }
    let row: Vec<usize> = (0..ra).map(|i| table[i * rb..(i + 1) * rb].iter().sum()).collect();
    let col: Vec<usize> = (0..rb).map(|j| (0..ra).map(|i| table[i * rb + j]).sum()).collect();
    let rows_used = row.iter().filter(|&&c| c > 0).count();
    let cols_used = col.iter().filter(|&&c| c > 0).count();
    let k = rows_used.min(cols_used);
    if k < 2 {
        return 0.0;
    }
    let n = a.len() as f64;
    let mut chi2 = 0.0;
    for i in 0..ra {
        for j in 0..rb {
            if row[i] == 0 || col[j] == 0 {
                continue;
            }
            let expected = row[i] as f64 * col[j] as f64 / n;
            let diff = table[i * rb + j] as f64 - expected;
            chi2 += diff * diff / expected;
        }
    }
    (chi2 / (n * (k - 1) as f64)).sqrt().min(1.0)
}

fn codes(d: &Dataset, j: usize) -> Vec<usize> {
    let col: Vec<f64> = d.column(j).collect();
    if d.schema().feature(j).is_categorical() {
        return col.iter().map(|&v| v as usize).collect();
    }
    let mut cuts = quantile_boundaries(&col, DEFAULT_QUANTILES);
    cuts.dedup();
    col.iter().map(|&v| cuts.iter().filter(|&&c| v > c).count()).collect()
}

/// Association strength in `[0, 1]` between columns `a` and `b`.
pub fn association(d: &Dataset, a: usize, b: usize) -> f64 {
    let sa = d.schema().feature(a);
    let sb = d.schema().feature(b);
    if !sa.is_categorical() && !sb.is_categorical() {
        let ca: Vec<f64> = d.column(a).collect();
        let cb: Vec<f64> = d.column(b).collect();
        pearson(&ca, &cb).abs()
    } else {
        cramers_v(&codes(d, a), &codes(d, b))
    }
}

/// Non-target features whose association with some target reaches `threshold`,
/// in schema order.
pub fn correlated_features<S: AsRef<str>>(d: &Dataset, targets: &[S], threshold: f64) -> Result<Vec<String>> {
    let target_idx = d.schema().indices_of(targets)?;
    if target_idx.is_empty() || d.is_empty() {
        return Ok(Vec::new());
    }
    let out = (0..d.n_features())
        .filter(|j| !target_idx.contains(j))
        .filter(|&j| {
            target_idx
                .iter()
                .any(|&t| association(d, t, j) >= threshold - ASSOCIATION_SLACK)
        })
        .map(|j| d.schema().feature(j).name.clone())
        .collect();
    Ok(out)
}
