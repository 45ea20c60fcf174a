//! Quantile discretization and in-bin sampling of encoded rows.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::data::{FeatureStat, FeatureStats};
use crate::seed::Rng;

/// Sampling recipe for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnBins {
    /// Quantile bins; bin `k` covers `(bounds[k].0, bounds[k].1]`, and the
    /// first bin also includes its lower end.
    Numerical {
        cuts: Vec<f64>,
        bounds: Vec<(f64, f64)>,
        mean: f64,
        std: f64,
    },
    Categorical {
        cumulative: Vec<f64>,
    },
    /// Constant in training: held at the explained value.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    pub stats: FeatureStats,
    pub columns: Vec<ColumnBins>,
}

impl Discretizer {
    pub fn new(stats: FeatureStats) -> Self {
        let columns = stats
            .features
            .iter()
            .map(|s| match s {
                FeatureStat::Numerical { degenerate: true, .. } => ColumnBins::Fixed,
                FeatureStat::Numerical {
                    mean,
                    std,
                    min,
                    max,
                    boundaries,
                    ..
                } => {
                    let mut cuts: Vec<f64> = boundaries.iter().copied().filter(|&c| c < *max).collect();
                    cuts.dedup();
                    let mut bounds = Vec::with_capacity(cuts.len() + 1);
                    let mut lo = *min;
                    for &c in &cuts {
                        bounds.push((lo, c));
                        lo = c;
                    }
                    bounds.push((lo, *max));
                    ColumnBins::Numerical {
                        cuts,
                        bounds,
                        mean: *mean,
                        std: *std,
                    }
                }
                FeatureStat::Categorical { frequencies } => {
                    let mut acc = 0.0;
                    ColumnBins::Categorical {
                        cumulative: frequencies
                            .iter()
                            .map(|f| {
                                acc += f;
                                acc
                            })
                            .collect(),
                    }
                }
            })
            .collect();
        Discretizer { stats, columns }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn n_bins(&self, j: usize) -> usize {
        match &self.columns[j] {
            ColumnBins::Numerical { bounds, .. } => bounds.len(),
            ColumnBins::Categorical { cumulative } => cumulative.len(),
            ColumnBins::Fixed => 1,
        }
    }

    /// Discrete value of `value` in column `j`: quantile bin index for
    /// numerical columns, the code itself for categorical ones.
    pub fn bin_of(&self, j: usize, value: f64) -> usize {
        match &self.columns[j] {
            ColumnBins::Numerical { cuts, .. } => cuts.partition_point(|&c| c < value),
            ColumnBins::Categorical { .. } => value as usize,
            ColumnBins::Fixed => 0,
        }
    }

    pub fn discretize(&self, row: &[f64]) -> Vec<usize> {
        row.iter().enumerate().map(|(j, &v)| self.bin_of(j, v)).collect()
    }

    /// Draws a value for column `j`, returning `(value, matches_x)`.
    pub(crate) fn draw(&self, j: usize, x_value: f64, x_bin: usize, rng: &mut Rng) -> (f64, bool) {
        match &self.columns[j] {
            ColumnBins::Fixed => (x_value, true),
            ColumnBins::Categorical { cumulative } => {
                let total = *cumulative.last().unwrap_or(&1.0);
                let u = rng.gen::<f64>() * total;
                let code = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                (code as f64, code == x_bin)
            }
            ColumnBins::Numerical { bounds, mean, std, .. } => {
                let bin = rng.gen_range(0..bounds.len());
                let (lo, hi) = bounds[bin];
                (sample_in_bin(*mean, *std, lo, hi, bin == 0, rng), bin == x_bin)
            }
        }
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal restricted to `[a, b]` by inverse-CDF sampling, working in
/// whichever tail keeps the probabilities well away from 1.
fn truncated_std_normal(a: f64, b: f64, u: f64) -> f64 {
    if a >= 0.0 {
        let (sa, sb) = (std_normal_sf(a), std_normal_sf(b));
        if sa - sb > 0.0 {
            let s = sa - u * (sa - sb);
            return std::f64::consts::SQRT_2 * erfc_inv(2.0 * s);
        }
    } else if b <= 0.0 {
        return -truncated_std_normal(-b, -a, 1.0 - u);
    } else {
        let (pa, pb) = (std_normal_cdf(a), std_normal_cdf(b));
        if pb - pa > 0.0 {
            let p = pa + u * (pb - pa);
            return -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
        }
    }
    // no representable mass between the bounds
    a + u * (b - a)
}

/// Draws from `N(mean, std)` truncated to the bin `[lo, hi]` (lower end
/// excluded unless `closed_low`).
pub(crate) fn sample_in_bin(mean: f64, std: f64, lo: f64, hi: f64, closed_low: bool, rng: &mut Rng) -> f64 {
    if lo >= hi {
        return hi;
    }
    if !(std > 0.0) {
        let v = mean.clamp(lo, hi);
        return if v > lo || closed_low { v } else { lo + (hi - lo) / 2.0 };
    }
    let (a, b) = ((lo - mean) / std, (hi - mean) / std);
    for _ in 0..8 {
        let z = truncated_std_normal(a, b, rng.gen::<f64>());
        let v = (mean + std * z).clamp(lo, hi);
        if v.is_finite() && (v > lo || closed_low) {
            return v;
        }
    }
    lo + (hi - lo) / 2.0
}
