//! L2-regularized logistic regression, trained by damped Newton iterations
//! (default) or full-batch gradient descent.
//!
//! Numerical inputs are standardized with training mean/std and categorical
//! inputs are one-hot expanded; the expansion is internal to the model.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::lime::linalg::{cholesky_solve, pinv_solve};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogisticSolver {
    /// Newton steps with backtracking on the loss.
    Newton,
    /// Fixed-step full-batch gradient descent.
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticHyper {
    pub solver: LogisticSolver,
    /// Step size for gradient descent; unused by Newton.
    pub learning_rate: f64,
    /// Iteration cap.
    pub epochs: usize,
    pub l2: f64,
    /// Gradient-norm level at which training stops early and reports convergence.
    pub tolerance: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        LogisticHyper {
            solver: LogisticSolver::Newton,
            learning_rate: 0.1,
            epochs: 100,
            l2: 1e-4,
            tolerance: 1e-8,
        }
    }
}

impl LogisticHyper {
    pub fn gradient_descent() -> Self {
        LogisticHyper {
            solver: LogisticSolver::GradientDescent,
            epochs: 500,
            tolerance: 1e-6,
            ..Self::default()
        }
    }
}

/// How one input column maps into the expanded design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnEncoding {
    Numerical { offset: usize, mean: f64, scale: f64 },
    Categorical { offset: usize, cardinality: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignEncoder {
    pub columns: Vec<ColumnEncoding>,
    pub width: usize,
}

impl DesignEncoder {
    pub fn fit(train: &Dataset) -> Self {
        let mut offset = 0;
        let columns = train
            .schema()
            .features()
            .iter()
            .enumerate()
            .map(|(j, f)| match f.kind {
                FeatureKind::Numerical => {
                    let col: Vec<f64> = train.column(j).collect();
                    let (mean, sd) = crate::data::stats::mean_std(&col);
                    let enc = ColumnEncoding::Numerical {
                        offset,
                        mean,
                        scale: if sd > 0.0 { sd } else { 1.0 },
                    };
                    offset += 1;
                    enc
                }
                FeatureKind::Categorical => {
                    let enc = ColumnEncoding::Categorical {
                        offset,
                        cardinality: f.cardinality(),
                    };
                    offset += f.cardinality();
                    enc
                }
            })
            .collect();
        DesignEncoder { columns, width: offset }
    }

    /// Sparse expansion of one row: `(design index, value)` per input column.
    /// Categorical codes outside the training cardinality contribute nothing.
    pub fn encode_into<T: Scalar>(&self, row: &[f64], out: &mut Vec<(u32, T)>) {
        out.clear();
        for (c, &v) in self.columns.iter().zip(row) {
            match *c {
                ColumnEncoding::Numerical { offset, mean, scale } => {
                    out.push((offset as u32, T::lit((v - mean) / scale)));
                }
                ColumnEncoding::Categorical { offset, cardinality } => {
                    let code = v as usize;
                    if v >= 0.0 && code < cardinality {
                        out.push(((offset + code) as u32, T::one()));
                    }
                }
            }
        }
    }
}

/// Sparse design matrix in compressed-row layout.
#[derive(Debug, Clone)]
pub struct Design<T> {
    pub width: usize,
    row_ptr: Vec<usize>,
    entries: Vec<(u32, T)>,
    pub targets: Vec<T>,
}

impl<T: Scalar> Design<T> {
    pub fn build(encoder: &DesignEncoder, data: &Dataset) -> Self {
        let mut row_ptr = Vec::with_capacity(data.n_rows() + 1);
        let mut entries = Vec::with_capacity(data.n_rows() * data.n_features());
        let mut buf = Vec::new();
        row_ptr.push(0);
        for r in data.rows() {
            encoder.encode_into(r, &mut buf);
            entries.extend_from_slice(&buf);
            row_ptr.push(entries.len());
        }
        Design {
            width: encoder.width,
            row_ptr,
            entries,
            targets: data.labels().iter().map(|&l| T::from_u8(l).unwrap()).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, T)] {
        &self.entries[self.row_ptr[i]..self.row_ptr[i + 1]]
    }
}

pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Mean log-loss plus `l2/2 * ||w||^2` (intercept unpenalized).
pub struct LogisticObjective<'a, T> {
    pub design: &'a Design<T>,
    pub l2: T,
}

impl<'a, T: Scalar> LogisticObjective<'a, T> {
    fn margin(&self, i: usize, w: &[T], b: T) -> T {
        self.design
            .row(i)
            .iter()
            .fold(b, |acc, &(k, v)| acc + w[k as usize] * v)
    }

    pub fn loss(&self, w: &[T], b: T) -> T {
        let n = T::from_usize_lossy(self.design.n_rows());
        let data: T = (0..self.design.n_rows())
            .map(|i| {
                let z = self.margin(i, w, b);
                let y = self.design.targets[i];
                // log(1 + e^z) - y z, computed stably
                let softplus = if z > T::zero() {
                    z + (-z).exp().ln_1p()
                } else {
                    z.exp().ln_1p()
                };
                softplus - y * z
            })
            .sum();
        let reg = w.iter().map(|&x| x * x).sum::<T>() * self.l2 / T::lit(2.0);
        data / n + reg
    }

    /// Gradient with respect to `(w, b)`.
    pub fn gradient(&self, w: &[T], b: T) -> (Vec<T>, T) {
        let n = T::from_usize_lossy(self.design.n_rows());
        let mut gw = vec![T::zero(); w.len()];
        let mut gb = T::zero();
        for i in 0..self.design.n_rows() {
            let resid = sigmoid(self.margin(i, w, b)) - self.design.targets[i];
            gb += resid;
            for &(k, v) in self.design.row(i) {
                gw[k as usize] += resid * v;
            }
        }
        for (g, &x) in gw.iter_mut().zip(w) {
            *g = *g / n + self.l2 * x;
        }
        (gw, gb / n)
    }

    /// Dense Hessian over `(w, b)`, row-major with the intercept last.
    pub fn hessian(&self, w: &[T], b: T) -> Vec<T> {
        let n = T::from_usize_lossy(self.design.n_rows());
        let p = w.len() + 1;
        let mut h = vec![T::zero(); p * p];
        for i in 0..self.design.n_rows() {
            let mu = sigmoid(self.margin(i, w, b));
            let s = mu * (T::one() - mu);
            if s == T::zero() {
                continue;
            }
            let row = self.design.row(i);
            for &(a, va) in row {
                let sa = s * va;
                let a = a as usize;
                for &(c, vc) in row {
                    h[a * p + c as usize] += sa * vc;
                }
                h[a * p + p - 1] += sa;
            }
            h[(p - 1) * p + p - 1] += s;
        }
        for a in 0..p - 1 {
            h[(p - 1) * p + a] = h[a * p + p - 1];
        }
        h.iter_mut().for_each(|x| *x /= n);
        for a in 0..p - 1 {
            h[a * p + a] += self.l2;
        }
        h
    }
}

fn grad_norm(gw: &[f64], gb: f64) -> f64 {
    (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub encoder: DesignEncoder,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub epochs_run: usize,
}

impl LogisticModel {
    pub fn fit(train: &Dataset, hyper: &LogisticHyper) -> LogisticModel {
        let encoder = DesignEncoder::fit(train);
        let design = Design::<f64>::build(&encoder, train);
        let objective = LogisticObjective {
            design: &design,
            l2: hyper.l2,
        };
        let mut w = vec![0.0; encoder.width];
        let mut b = 0.0;
        let mut converged = false;
        let mut epochs_run = 0;
        for _ in 0..hyper.epochs {
            let (gw, gb) = objective.gradient(&w, b);
            if grad_norm(&gw, gb) < hyper.tolerance {
                converged = true;
                break;
            }
            match hyper.solver {
                LogisticSolver::GradientDescent => {
                    for (x, g) in w.iter_mut().zip(&gw) {
                        *x -= hyper.learning_rate * g;
                    }
                    b -= hyper.learning_rate * gb;
                }
                LogisticSolver::Newton => {
                    let p = w.len() + 1;
                    let h = objective.hessian(&w, b);
                    let mut g = gw;
                    g.push(gb);
                    let step = cholesky_solve(&h, &g, p).unwrap_or_else(|| pinv_solve(&h, &g, p));
                    let current = objective.loss(&w, b);
                    let slope: f64 = step.iter().zip(&g).map(|(s, g)| s * g).sum();
                    let mut t = 1.0;
                    for _ in 0..40 {
                        let wt: Vec<f64> = w.iter().zip(&step).map(|(x, s)| x - t * s).collect();
                        let bt = b - t * step[p - 1];
                        if objective.loss(&wt, bt) <= current - 1e-4 * t * slope {
                            w = wt;
                            b = bt;
                            break;
                        }
                        t *= 0.5;
                    }
                }
            }
            epochs_run += 1;
        }
        if !converged {
            let (gw, gb) = objective.gradient(&w, b);
            converged = grad_norm(&gw, gb) < hyper.tolerance;
        }
        LogisticModel {
            encoder,
            weights: w,
            intercept: b,
            converged,
            epochs_run,
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let mut z = self.intercept;
        for (c, &v) in self.encoder.columns.iter().zip(row) {
            match *c {
                ColumnEncoding::Numerical { offset, mean, scale } => {
                    z += self.weights[offset] * ((v - mean) / scale);
                }
                ColumnEncoding::Categorical { offset, cardinality } => {
                    let code = v as usize;
                    if v >= 0.0 && code < cardinality {
                        z += self.weights[offset + code];
                    }
                }
            }
        }
        sigmoid(z)
    }
}
