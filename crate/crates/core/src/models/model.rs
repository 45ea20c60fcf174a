use std::path::Path;

use serde::{Deserialize, Serialize};

use super::forest::{ForestHyper, RandomForest};
use super::logistic::{LogisticHyper, LogisticModel};
use super::threshold::{tune_threshold, DEFAULT_THRESHOLD};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Version tag written into saved models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Logistic,
    Forest,
    DropoutWrapper,
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelParams {
    Logistic(LogisticModel),
    Forest(RandomForest),
    DropoutWrapper {
        dropped: Vec<String>,
        /// Input column indices forwarded to the inner model.
        keep: Vec<usize>,
        inner: Box<TrainedModel>,
    },
    Ensemble {
        members: Vec<TrainedModel>,
    },
}

/// A probabilistic binary classifier over full-width encoded rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    /// Names of the columns of the rows this model accepts.
    pub input_features: Vec<String>,
    /// Columns whose values can influence the output.
    pub active_features: Vec<String>,
    pub decision_threshold: f64,
    pub seed: u64,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Logistic(_) => ModelKind::Logistic,
            ModelParams::Forest(_) => ModelKind::Forest,
            ModelParams::DropoutWrapper { .. } => ModelKind::DropoutWrapper,
            ModelParams::Ensemble { .. } => ModelKind::Ensemble,
        }
    }

    pub fn input_width(&self) -> usize {
        self.input_features.len()
    }

    /// Class-1 probability for one full-width row.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.input_width());
        match &self.params {
            ModelParams::Logistic(m) => m.predict_proba(row),
            ModelParams::Forest(f) => f.predict_proba(row),
            ModelParams::DropoutWrapper { keep, inner, .. } => {
                let projected: Vec<f64> = keep.iter().map(|&j| row[j]).collect();
                inner.predict_proba(&projected)
            }
            ModelParams::Ensemble { members } => {
                let p: Vec<f64> = members.iter().map(|m| m.predict_proba(row)).collect();
                mean_of(&p)
            }
        }
    }

    /// Probabilities for a row-major block of full-width rows.
    pub fn predict_proba_batch(&self, values: &[f64]) -> Vec<f64> {
        let width = self.input_width();
        match &self.params {
            ModelParams::DropoutWrapper { keep, inner, .. } => {
                let mut projected = Vec::with_capacity(values.len() / width.max(1) * keep.len());
                for r in values.chunks_exact(width) {
                    projected.extend(keep.iter().map(|&j| r[j]));
                }
                inner.predict_proba_batch(&projected)
            }
            ModelParams::Ensemble { members } => {
                let per_member: Vec<Vec<f64>> = members.iter().map(|m| m.predict_proba_batch(values)).collect();
                let mut column = vec![0.0; members.len()];
                (0..values.len() / width)
                    .map(|i| {
                        for (c, p) in column.iter_mut().zip(&per_member) {
                            *c = p[i];
                        }
                        mean_of(&column)
                    })
                    .collect()
            }
            _ => values.chunks_exact(width).map(|r| self.predict_proba(r)).collect(),
        }
    }

    pub fn predict_class(&self, row: &[f64]) -> u8 {
        u8::from(self.predict_proba(row) >= self.decision_threshold)
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        self.decision_threshold = t;
        self
    }

    /// Whether the logistic core reached its gradient tolerance; `None` for forests.
    pub fn converged(&self) -> Option<bool> {
        match &self.params {
            ModelParams::Logistic(m) => Some(m.converged),
            ModelParams::Forest(_) => None,
            ModelParams::DropoutWrapper { inner, .. } => inner.converged(),
            ModelParams::Ensemble { members } => {
                members.iter().filter_map(TrainedModel::converged).reduce(|a, b| a && b)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SavedModel {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<TrainedModel> {
        let doc: SavedModel = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Serde(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json()?).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel> {
        let s = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_json(&s)
    }
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    format_version: u32,
    model: TrainedModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Algorithm {
    Logistic(LogisticHyper),
    Forest(ForestHyper),
}

/// Whether trained models get an F1-optimal decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdTuning {
    /// Keep 0.5.
    Off,
    /// Maximize F1 on the tuning set.
    MaxF1,
}

/// Decision threshold of an averaged ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleThreshold {
    /// Always 0.5.
    Half,
    /// Mean of the member thresholds.
    MemberMean,
}

/// Everything needed to (re)train a model on a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecipe {
    pub algorithm: Algorithm,
    pub threshold: ThresholdTuning,
}

impl TrainingRecipe {
    pub fn logistic() -> Self {
        TrainingRecipe {
            algorithm: Algorithm::Logistic(LogisticHyper::default()),
            threshold: ThresholdTuning::MaxF1,
        }
    }

    pub fn forest() -> Self {
        TrainingRecipe {
            algorithm: Algorithm::Forest(ForestHyper::default()),
            threshold: ThresholdTuning::MaxF1,
        }
    }

    pub fn with_threshold(mut self, t: ThresholdTuning) -> Self {
        self.threshold = t;
        self
    }

    /// Trains on `train` and, if enabled, tunes the threshold on `tuning`
    /// (on `train` itself when `None`).
    pub fn fit(&self, train: &Dataset, tuning: Option<&Dataset>, seed_: u64) -> Result<TrainedModel> {
        let m = self.fit_raw(train, seed_)?;
        match self.threshold {
            ThresholdTuning::Off => Ok(m),
            ThresholdTuning::MaxF1 => Ok(tune_threshold(m, tuning.unwrap_or(train))?.model),
        }
    }

    fn fit_raw(&self, train: &Dataset, seed_: u64) -> Result<TrainedModel> {
        let counts = train.class_counts();
        if counts[0] < 2 || counts[1] < 2 {
            return Err(Error::argument(format!(
                "training needs at least two rows per class, got {counts:?}"
            )));
        }
        let names = train.schema().names();
        let params = match &self.algorithm {
            Algorithm::Logistic(h) => ModelParams::Logistic(LogisticModel::fit(train, h)),
            Algorithm::Forest(h) => ModelParams::Forest(RandomForest::fit(train, h, seed_)?),
        };
        Ok(TrainedModel {
            input_features: names.clone(),
            active_features: names,
            decision_threshold: DEFAULT_THRESHOLD,
            seed: seed_,
            params,
        })
    }
}

/// Retrains `recipe` without the `dropped` columns. The result still accepts
/// full-width rows and ignores the dropped columns.
pub fn drop_features<S: AsRef<str>>(
    recipe: &TrainingRecipe,
    train: &Dataset,
    tuning: Option<&Dataset>,
    dropped: &[S],
    seed_: u64,
) -> Result<TrainedModel> {
    let drop_idx = train.schema().indices_of(dropped)?;
    let keep: Vec<usize> = (0..train.n_features()).filter(|j| !drop_idx.contains(j)).collect();
    if keep.is_empty() {
        return Err(Error::argument("cannot drop every feature"));
    }
    let tuning = tuning.map(|t| t.select_columns(&keep));
    let inner = recipe.fit(&train.select_columns(&keep), tuning.as_ref(), seed_)?;
    let names = train.schema().names();
    Ok(TrainedModel {
        active_features: keep.iter().map(|&j| names[j].clone()).collect(),
        input_features: names,
        decision_threshold: inner.decision_threshold,
        seed: seed_,
        params: ModelParams::DropoutWrapper {
            dropped: drop_idx
                .iter()
                .map(|&j| train.schema().feature(j).name.clone())
                .collect(),
            keep,
            inner: Box::new(inner),
        },
    })
}

/// Arithmetic mean that returns the common value exactly when all inputs agree.
pub(crate) fn mean_of(values: &[f64]) -> f64 {
    let first = values.first().copied().unwrap_or(f64::NAN);
    if values.iter().all(|v| v.to_bits() == first.to_bits()) {
        return first;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Model whose class-1 probability is the arithmetic mean of the members'.
pub fn ensemble_average(members: Vec<TrainedModel>, threshold: EnsembleThreshold) -> Result<TrainedModel> {
    let first = members
        .first()
        .ok_or_else(|| Error::argument("an ensemble needs at least one member"))?;
    let input_features = first.input_features.clone();
    if let Some(m) = members.iter().find(|m| m.input_features != input_features) {
        return Err(Error::argument(format!(
            "ensemble members disagree on input columns ({} vs {})",
            m.input_width(),
            input_features.len()
        )));
    }
    let active_features = input_features
        .iter()
        .filter(|f| members.iter().any(|m| m.active_features.contains(f)))
        .cloned()
        .collect();
    let decision_threshold = match threshold {
        EnsembleThreshold::Half => DEFAULT_THRESHOLD,
        EnsembleThreshold::MemberMean => mean_of(&members.iter().map(|m| m.decision_threshold).collect::<Vec<_>>()),
    };
    Ok(TrainedModel {
        input_features,
        active_features,
        decision_threshold,
        seed: first.seed,
        params: ModelParams::Ensemble { members },
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::Rng;

    use super::*;
    use crate::data::{Feature, FeatureSchema};
    use crate::seed;

    fn data(n: usize, s: u64) -> Dataset {
        let mut rng = seed::rng(s);
        let schema = Arc::new(
            FeatureSchema::new(
                vec![
                    Feature::numerical("a"),
                    Feature::categorical("c", vec!["p".into(), "q".into()]),
                    Feature::numerical("b"),
                ],
                "y",
                ["0".into(), "1".into()],
            )
            .unwrap(),
        );
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let c = f64::from(rng.gen_range(0u8..2));
            let b: f64 = rng.gen_range(-1.0..1.0);
            labels.push(u8::from(a + 0.5 * c - 0.3 * b + rng.gen_range(-0.3..0.3) > 0.2));
            rows.push(vec![a, c, b]);
        }
        Dataset::new(schema, rows, labels).unwrap()
    }

    #[test]
    fn dropping_nothing_matches_base_recipe() {
        let d = data(200, 1);
        for recipe in [
            TrainingRecipe::logistic(),
            TrainingRecipe {
                algorithm: Algorithm::Forest(ForestHyper {
                    n_trees: 5,
                    ..Default::default()
                }),
                threshold: ThresholdTuning::Off,
            },
        ] {
            let base = recipe.fit(&d, None, 3).unwrap();
            let wrapped = drop_features::<&str>(&recipe, &d, None, &[], 3).unwrap();
            for r in d.rows() {
                assert_eq!(base.predict_proba(r), wrapped.predict_proba(r));
            }
            assert_eq!(base.decision_threshold, wrapped.decision_threshold);
        }
    }

    #[test]
    fn dropping_everything_is_rejected() {
        let d = data(50, 2);
        let err = drop_features(&TrainingRecipe::logistic(), &d, None, &["a", "b", "c"], 0).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn dropout_ignores_dropped_column() {
        let d = data(200, 3);
        let m = drop_features(&TrainingRecipe::logistic(), &d, None, &["c"], 0).unwrap();
        assert_eq!(m.active_features, vec!["a", "b"]);
        let mut rng = seed::rng(5);
        for r in d.rows() {
            let mut r2 = r.to_vec();
            r2[1] = f64::from(rng.gen_range(0u8..2));
            assert_eq!(m.predict_proba(r).to_bits(), m.predict_proba(&r2).to_bits());
        }
    }

    #[test]
    fn ensemble_mean_and_single_member() {
        let d = data(150, 4);
        let recipe = TrainingRecipe::logistic();
        let m1 = recipe.fit(&d, None, 0).unwrap();
        let m2 = drop_features(&recipe, &d, None, &["a"], 1).unwrap();
        let single = ensemble_average(vec![m1.clone()], EnsembleThreshold::MemberMean).unwrap();
        let pair = ensemble_average(vec![m1.clone(), m2.clone()], EnsembleThreshold::Half).unwrap();
        for r in d.rows() {
            assert_eq!(single.predict_proba(r), m1.predict_proba(r));
            let direct = (m1.predict_proba(r) + m2.predict_proba(r)) / 2.0;
            assert!((pair.predict_proba(r) - direct).abs() < 1e-12);
        }
        assert_eq!(single.decision_threshold, m1.decision_threshold);
        assert_eq!(pair.decision_threshold, 0.5);
        assert!(ensemble_average(vec![], EnsembleThreshold::Half).is_err());
        let batch = pair.predict_proba_batch(d.values());
        for (r, p) in d.rows().zip(batch) {
            assert_eq!(p, pair.predict_proba(r));
        }
    }

    #[test]
    fn json_round_trip_reproduces_predictions_bit_exactly() {
        let d = data(120, 6);
        let recipe = TrainingRecipe {
            algorithm: Algorithm::Forest(ForestHyper {
                n_trees: 4,
                ..Default::default()
            }),
            threshold: ThresholdTuning::Off,
        };
        let m = ensemble_average(
            vec![
                TrainingRecipe::logistic().fit(&d, None, 1).unwrap(),
                drop_features(&recipe, &d, None, &["b"], 2).unwrap(),
            ],
            EnsembleThreshold::MemberMean,
        )
        .unwrap();
        let back = TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        for r in d.rows() {
            assert_eq!(back.predict_proba(r).to_bits(), m.predict_proba(r).to_bits());
        }
    }

    #[test]
    fn tuning_set_is_used_and_projected() {
        let d = data(300, 7);
        let (fit, val) = crate::data::train_test_split(&d, 0.2, 1).unwrap();
        let recipe = TrainingRecipe::logistic();
        let m = recipe.fit(&fit, Some(&val), 4).unwrap();
        let direct = tune_threshold(
            recipe.with_threshold(ThresholdTuning::Off).fit(&fit, None, 4).unwrap(),
            &val,
        )
        .unwrap();
        assert_eq!(m.decision_threshold, direct.model.decision_threshold);
        let w = drop_features(&recipe, &fit, Some(&val), &["a"], 4).unwrap();
        assert!(w.decision_threshold > 0.0 && w.decision_threshold < 1.0);
    }

    #[test]
    fn identical_members_reproduce_the_member() {
        let d = data(200, 8);
        let m = TrainingRecipe::logistic().fit(&d, None, 0).unwrap();
        let e = ensemble_average(vec![m.clone(), m.clone(), m.clone()], EnsembleThreshold::MemberMean).unwrap();
        assert_eq!(e.decision_threshold, m.decision_threshold);
        for r in d.rows() {
            assert_eq!(e.predict_proba(r).to_bits(), m.predict_proba(r).to_bits());
            assert_eq!(e.predict_class(r), m.predict_class(r));
        }
    }
}
