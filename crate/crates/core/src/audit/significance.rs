//! Paired two-sided t-test on per-run accuracies.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    /// Statistic of the differences `a - b`.
    pub t_statistic: f64,
    pub p_value: f64,
    /// Zero-variance differences with a nonzero mean: `t` is infinite, `p` 0.
    pub degenerate: bool,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::argument(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::argument("a paired t-test needs at least two pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            TTest {
                t_statistic: 0.0,
                p_value: 1.0,
                degenerate: false,
            }
        } else {
            TTest {
                t_statistic: f64::INFINITY.copysign(mean),
                p_value: 0.0,
                degenerate: true,
            }
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::argument(e.to_string()))?;
    Ok(TTest {
        t_statistic: t,
        p_value: (2.0 * dist.sf(t.abs())).min(1.0),
        degenerate: false,
    })
}
