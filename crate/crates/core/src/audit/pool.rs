//! One-or-all feature-dropout pool.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{correlated_features, Dataset};
use crate::error::{Error, Result};
use crate::models::{drop_features, TrainedModel, TrainingRecipe};
use crate::seed;

/// Correlated companions of each flagged feature in `data`, excluding the
/// flagged features themselves.
pub fn companions(data: &Dataset, flagged: &[String], threshold: f64) -> Result<BTreeMap<String, Vec<String>>> {
    flagged
        .iter()
        .map(|f| {
            let found = correlated_features(data, &[f.as_str()], threshold)?;
            Ok((f.clone(), found.into_iter().filter(|c| !flagged.contains(c)).collect()))
        })
        .collect()
}

/// Drop sets for `flagged` (length `i`): one per flagged feature with its
/// companions, then everything flagged plus all companions. Each set lists
/// features in schema order.
pub fn drop_sets(
    schema_order: &[String],
    flagged: &[String],
    companions: &BTreeMap<String, Vec<String>>,
) -> Vec<Vec<String>> {
    let ordered = |names: &[&str]| -> Vec<String> {
        schema_order
            .iter()
            .filter(|f| names.contains(&f.as_str()))
            .cloned()
            .collect()
    };
    let mut all: Vec<&str> = Vec::new();
    let mut sets: Vec<Vec<String>> = Vec::new();
    for f in flagged {
        let mut one = vec![f.as_str()];
        one.extend(companions.get(f).into_iter().flatten().map(String::as_str));
        all.extend(&one);
        sets.push(ordered(&one));
    }
    sets.push(ordered(&all));
    sets
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolMember {
    pub dropped: Vec<String>,
    pub seed: u64,
    pub model: TrainedModel,
}

/// Trains the `i + 1` dropout models. Member `k` uses the seed derived from
/// `(seed, "pool", k)`.
pub fn build_dropout_pool(
    recipe: &TrainingRecipe,
    train: &Dataset,
    tuning: Option<&Dataset>,
    flagged: &[String],
    companions: &BTreeMap<String, Vec<String>>,
    seed_: u64,
) -> Result<Vec<PoolMember>> {
    if flagged.is_empty() {
        return Err(Error::config("sensitive", "no flagged feature to drop"));
    }
    let sets = drop_sets(&train.schema().names(), flagged, companions);
    if sets.last().is_some_and(|all| all.len() >= train.n_features()) {
        return Err(Error::config(
            "sensitive",
            "flagged features and their correlated companions cover every feature",
        ));
    }
    sets.into_par_iter()
        .enumerate()
        .map(|(k, dropped)| {
            let s = seed::derive(seed_, "pool", k as u64);
            let model = drop_features(recipe, train, tuning, &dropped, s)?;
            Ok(PoolMember {
                dropped,
                seed: s,
                model,
            })
        })
        .collect()
}
