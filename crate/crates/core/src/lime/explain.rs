use serde::{Deserialize, Serialize};

use super::discretize::Discretizer;
use super::kernel::default_sigma;
use super::sample::{sample_neighborhood, Neighborhood};
use super::surrogate::fit_weighted_ridge;
use crate::error::{Error, Result};
use crate::models::TrainedModel;
use crate::scalar::{cast, Scalar};

pub const DEFAULT_N_SAMPLES: usize = 5000;
pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    pub n_samples: usize,
    /// Kernel width; `None` means `0.75 * number of columns`.
    pub sigma: Option<f64>,
    pub ridge_lambda: f64,
    pub seed: u64,
    /// Fit coefficients only for the model's active features.
    pub active_only: bool,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            n_samples: DEFAULT_N_SAMPLES,
            sigma: None,
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            seed: 0,
            active_only: true,
        }
    }
}

impl LimeConfig {
    pub fn sigma_for(&self, n_columns: usize) -> f64 {
        self.sigma.unwrap_or_else(|| default_sigma(n_columns))
    }
}

/// Signed per-feature contributions of a local linear surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExplanation<T = f64> {
    pub instance: Vec<f64>,
    pub predicted_class_probability: f64,
    /// Sorted by decreasing magnitude, ties in feature order.
    pub contributions: Vec<(String, T)>,
    pub intercept: T,
    pub surrogate_fit_error: T,
    pub rank_deficient: bool,
    pub sigma: f64,
    pub n_samples: usize,
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl<T: Scalar> LocalExplanation<T> {
    pub fn coefficient(&self, feature: &str) -> Option<T> {
        self.contributions.iter().find(|(f, _)| f == feature).map(|(_, c)| *c)
    }
}

/// Fits the weighted ridge surrogate on the binary columns `columns` of `nb`.
/// `names[k]` labels `columns[k]`.
pub fn fit_surrogate<T: Scalar>(
    nb: &Neighborhood,
    columns: &[usize],
    names: &[String],
    targets: &[f64],
    ridge_lambda: f64,
) -> Result<LocalExplanation<T>> {
    if targets.len() != nb.len() {
        return Err(Error::argument(format!(
            "{} targets for {} samples",
            targets.len(),
            nb.len()
        )));
    }
    let d = columns.len();
    let mut z = Vec::with_capacity(nb.len() * d);
    for s in nb.iter() {
        z.extend(columns.iter().map(|&j| T::from_u8(s.z_binary[j]).unwrap()));
    }
    let y: Vec<T> = targets.iter().map(|&t| cast(t)).collect();
    let w: Vec<T> = nb.weights.iter().map(|&t| cast(t)).collect();
    let fit = fit_weighted_ridge(&z, d, &y, &w, cast(ridge_lambda))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        fit.coefficients[b]
            .abs()
            .partial_cmp(&fit.coefficients[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(LocalExplanation {
        instance: nb.sample(0).z_continuous.to_vec(),
        predicted_class_probability: targets[0],
        contributions: order
            .into_iter()
            .map(|k| (names[k].clone(), fit.coefficients[k]))
            .collect(),
        intercept: fit.intercept,
        surrogate_fit_error: fit.fit_error,
        rank_deficient: fit.rank_deficient,
        sigma: 0.0,
        n_samples: nb.len(),
        ridge_lambda,
        seed: 0,
    })
}

/// Columns (indices, names) the surrogate reports for `model`.
pub fn explained_columns(model: &TrainedModel, active_only: bool) -> (Vec<usize>, Vec<String>) {
    model
        .input_features
        .iter()
        .enumerate()
        .filter(|(_, f)| !active_only || model.active_features.contains(f))
        .map(|(j, f)| (j, f.clone()))
        .unzip()
}

/// Samples a neighbourhood of `x`, queries the model on it and fits the surrogate.
pub fn explain_instance<T: Scalar>(
    model: &TrainedModel,
    x: &[f64],
    disc: &Discretizer,
    cfg: &LimeConfig,
) -> Result<LocalExplanation<T>> {
    if model.input_width() != disc.width() || x.len() != disc.width() {
        return Err(Error::argument(format!(
            "model reads {} columns, discretizer covers {}, instance has {}",
            model.input_width(),
            disc.width(),
            x.len()
        )));
    }
    let sigma = cfg.sigma_for(disc.width());
    let nb = sample_neighborhood(x, disc, cfg.n_samples, sigma, cfg.seed)?;
    let targets = model.predict_proba_batch(&nb.continuous);
    let (columns, names) = explained_columns(model, cfg.active_only);
    let mut e = fit_surrogate(&nb, &columns, &names, &targets, cfg.ridge_lambda)?;
    e.sigma = sigma;
    e.seed = cfg.seed;
    Ok(e)
}
