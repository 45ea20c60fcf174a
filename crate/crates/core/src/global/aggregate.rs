use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pick::submodular_pick;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lime::explain::explained_columns;
use crate::lime::{explain_instance, Discretizer, LimeConfig};
use crate::models::TrainedModel;
use crate::scalar::Scalar;
use crate::seed;

pub const DEFAULT_CANDIDATE_COUNT: usize = 1000;
pub const DEFAULT_BUDGET: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Sum of signed coefficients.
    Signed,
    /// Sum of absolute coefficients.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PickStrategy {
    Submodular,
    /// Uniform sample of `budget` candidates.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalConfig {
    /// Rows explained before picking; larger datasets are subsampled.
    pub candidate_count: usize,
    pub budget: usize,
    /// Per-instance settings. The per-instance seed is derived from `seed`
    /// and the row index, so `lime.seed` is ignored here.
    pub lime: LimeConfig,
    pub aggregation: Aggregation,
    pub pick: PickStrategy,
    pub seed: u64,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            candidate_count: DEFAULT_CANDIDATE_COUNT,
            budget: DEFAULT_BUDGET,
            lime: LimeConfig::default(),
            aggregation: Aggregation::Signed,
            pick: PickStrategy::Submodular,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalExplanation<T = f64> {
    /// Aggregate per explained feature, in schema order.
    pub contributions: Vec<(String, T)>,
    /// Feature names by decreasing `|aggregate|`, ties in schema order.
    pub ranking: Vec<String>,
    /// Dataset row indices in pick order.
    pub picked_instances: Vec<usize>,
    pub config: GlobalConfig,
}

impl<T: Scalar> GlobalExplanation<T> {
    /// Builds the ranking from per-feature aggregates given in schema order.
    pub fn from_aggregates(
        contributions: Vec<(String, T)>,
        picked_instances: Vec<usize>,
        config: GlobalConfig,
    ) -> Self {
        let mut order: Vec<usize> = (0..contributions.len()).collect();
        order.sort_by(|&a, &b| {
            contributions[b]
                .1
                .abs()
                .partial_cmp(&contributions[a].1.abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        GlobalExplanation {
            ranking: order.iter().map(|&j| contributions[j].0.clone()).collect(),
            contributions,
            picked_instances,
            config,
        }
    }

    pub fn top_k(&self, k: usize) -> &[String] {
        &self.ranking[..k.min(self.ranking.len())]
    }

    pub fn contribution(&self, feature: &str) -> Option<T> {
        self.contributions.iter().find(|(f, _)| f == feature).map(|(_, c)| *c)
    }

    /// 1-based position in the ranking.
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.ranking.iter().position(|f| f == feature).map(|p| p + 1)
    }

    /// `(feature, aggregate)` in ranking order.
    pub fn ranked(&self) -> Vec<(String, T)> {
        self.ranking
            .iter()
            .map(|f| (f.clone(), self.contribution(f).expect("ranking lists known features")))
            .collect()
    }
}

/// Per-feature sum over the `picked` rows of a coefficient table, in pick order.
pub fn aggregate<T: Scalar>(coefficients: &[Vec<T>], picked: &[usize], rule: Aggregation) -> Vec<T> {
    let d = coefficients.first().map_or(0, Vec::len);
    let mut totals = vec![T::zero(); d];
    for &p in picked {
        for (t, &c) in totals.iter_mut().zip(&coefficients[p]) {
            *t += match rule {
                Aggregation::Signed => c,
                Aggregation::Absolute => c.abs(),
            };
        }
    }
    totals
}

fn candidates(n: usize, cfg: &GlobalConfig) -> Vec<usize> {
    if n <= cfg.candidate_count {
        return (0..n).collect();
    }
    let mut rng = seed::rng(seed::derive(cfg.seed, "candidates", 0));
    let mut rows = sample(&mut rng, n, cfg.candidate_count).into_vec();
    rows.sort_unstable();
    rows
}

/// Explains candidate rows of `data`, picks `cfg.budget` of them and sums
/// their coefficients per feature.
pub fn lime_global<T: Scalar>(
    model: &TrainedModel,
    data: &Dataset,
    disc: &Discretizer,
    cfg: &GlobalConfig,
) -> Result<GlobalExplanation<T>> {
    if data.is_empty() {
        return Err(Error::argument("cannot explain an empty dataset"));
    }
    if cfg.candidate_count == 0 || cfg.budget == 0 {
        return Err(Error::argument("candidate count and pick budget must be at least 1"));
    }
    let rows = candidates(data.n_rows(), cfg);
    let (_, names) = explained_columns(model, cfg.lime.active_only);
    let d = names.len();

    let coefficients: Vec<Vec<T>> = rows
        .par_iter()
        .map(|&i| {
            let lime = LimeConfig {
                seed: seed::derive(cfg.seed, "explain", i as u64),
                ..cfg.lime
            };
            let e = explain_instance::<T>(model, data.row(i), disc, &lime)?;
            Ok(names
                .iter()
                .map(|f| e.coefficient(f).expect("surrogate covers every explained column"))
                .collect())
        })
        .collect::<Result<_>>()?;

    let picked_local: Vec<usize> = match cfg.pick {
        PickStrategy::Submodular => {
            let flat: Vec<T> = coefficients.iter().flatten().map(|c| c.abs()).collect();
            submodular_pick(&flat, d, cfg.budget)?
        }
        PickStrategy::Random => {
            let mut rng = seed::rng(seed::derive(cfg.seed, "random-pick", 0));
            sample(&mut rng, rows.len(), cfg.budget.min(rows.len())).into_vec()
        }
    };

    let totals = aggregate(&coefficients, &picked_local, cfg.aggregation);
    Ok(GlobalExplanation::from_aggregates(
        names.into_iter().zip(totals).collect(),
        picked_local.iter().map(|&p| rows[p]).collect(),
        *cfg,
    ))
}
