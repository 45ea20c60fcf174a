//! Weighted ridge regression with an unpenalized intercept.
//!
//! Minimizes `sum_i w_i (b + z_i . beta - y_i)^2 + lambda ||beta||^2`. The
//! intercept is eliminated by centering on weighted means, the remaining
//! `d x d` system is solved by Cholesky, and a singular system falls back to
//! the minimum-norm solution.

use serde::{Deserialize, Serialize};

use super::linalg::{cholesky_solve, pinv_solve};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFit<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
    /// Weighted mean squared residual.
    pub fit_error: T,
    pub rank_deficient: bool,
}

/// `z` is row-major `n x d`.
pub fn fit_weighted_ridge<T: Scalar>(z: &[T], d: usize, y: &[T], w: &[T], lambda: T) -> Result<RidgeFit<T>> {
    let n = y.len();
    if n == 0 {
        return Err(Error::argument("surrogate fit needs at least one sample"));
    }
    if z.len() != n * d || w.len() != n {
        return Err(Error::argument("surrogate inputs have inconsistent shapes"));
    }
    if lambda < T::zero() {
        return Err(Error::argument("ridge penalty must be non-negative"));
    }
    if w.iter().any(|&wi| wi < T::zero()) {
        return Err(Error::argument("sample weights must be non-negative"));
    }
    let w_sum: T = w.iter().copied().sum();
    if !(w_sum > T::zero()) {
        return Err(Error::argument("sample weights sum to zero"));
    }

    let mut z_mean = vec![T::zero(); d];
    let mut y_mean = T::zero();
    for i in 0..n {
        let row = &z[i * d..(i + 1) * d];
        for (m, &v) in z_mean.iter_mut().zip(row) {
            *m += w[i] * v;
        }
        y_mean += w[i] * y[i];
    }
    z_mean.iter_mut().for_each(|m| *m /= w_sum);
    y_mean /= w_sum;

    let mut gram = vec![T::zero(); d * d];
    let mut rhs = vec![T::zero(); d];
    let mut centered = vec![T::zero(); d];
    for i in 0..n {
        for j in 0..d {
            centered[j] = z[i * d + j] - z_mean[j];
        }
        let yc = y[i] - y_mean;
        for a in 0..d {
            let wa = w[i] * centered[a];
            if wa == T::zero() {
                continue;
            }
            rhs[a] += wa * yc;
            for b in a..d {
                gram[a * d + b] += wa * centered[b];
            }
        }
    }
    for a in 0..d {
        gram[a * d + a] += lambda;
        for b in 0..a {
            gram[a * d + b] = gram[b * d + a];
        }
    }

    let (coefficients, rank_deficient) = match cholesky_solve(&gram, &rhs, d) {
        Some(beta) => (beta, false),
        None => (pinv_solve(&gram, &rhs, d), true),
    };
    let intercept = y_mean - coefficients.iter().zip(&z_mean).map(|(&c, &m)| c * m).sum::<T>();
    let sse: T = (0..n)
        .map(|i| {
            let pred = intercept
                + z[i * d..(i + 1) * d]
                    .iter()
                    .zip(&coefficients)
                    .map(|(&v, &c)| v * c)
                    .sum::<T>();
            w[i] * (pred - y[i]) * (pred - y[i])
        })
        .sum();
    Ok(RidgeFit {
        coefficients,
        intercept,
        fit_error: sse / w_sum,
        rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_targets_give_zero_slopes() {
        let z = [1.0f64, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let y = [0.3; 4];
        let w = [1.0, 0.5, 0.2, 0.9];
        for lambda in [0.0, 1.0] {
            let fit = fit_weighted_ridge(&z, 2, &y, &w, lambda).unwrap();
            assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-15));
            assert!((fit.intercept - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_linear_targets_recovered_without_penalty() {
        let z = [1.0f64, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let y: Vec<f64> = z.chunks(2).map(|r| 0.2 + 0.5 * r[0] - 0.7 * r[1]).collect();
        let fit = fit_weighted_ridge(&z, 2, &y, &[1.0, 2.0, 0.5, 1.0, 0.3], 0.0).unwrap();
        assert!((fit.coefficients[0] - 0.5).abs() < 1e-9);
        assert!((fit.coefficients[1] + 0.7).abs() < 1e-9);
        assert!((fit.intercept - 0.2).abs() < 1e-9);
        assert!(fit.fit_error < 1e-20);
        assert!(!fit.rank_deficient);
    }

    #[test]
    fn duplicated_column_is_min_norm() {
        // columns identical: any split a + b = 1 fits; min norm gives 0.5 / 0.5
        let z = [1.0f64, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let y = [1.0, 0.0, 1.0, 0.0];
        let fit = fit_weighted_ridge(&z, 2, &y, &[1.0; 4], 0.0).unwrap();
        assert!(fit.rank_deficient);
        assert!((fit.coefficients[0] - 0.5).abs() < 1e-9);
        assert!((fit.coefficients[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn input_validation() {
        assert!(fit_weighted_ridge::<f64>(&[], 1, &[], &[], 1.0).is_err());
        assert!(fit_weighted_ridge(&[1.0], 1, &[1.0], &[1.0], -1.0).is_err());
        assert!(fit_weighted_ridge(&[1.0], 1, &[1.0], &[0.0], 1.0).is_err());
    }

    #[test]
    fn f32_fit() {
        let z = [1.0f32, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let y: Vec<f32> = z.chunks(2).map(|r| 0.1 + 0.4 * r[0] + 0.2 * r[1]).collect();
        let fit = fit_weighted_ridge(&z, 2, &y, &[1.0; 4], 0.0).unwrap();
        assert!((fit.coefficients[0] - 0.4).abs() < 1e-5);
    }
}
