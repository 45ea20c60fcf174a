//! Probabilistic binary classifiers: logistic regression, random forest,
//! feature-dropout wrappers and the probability-averaging ensemble.

pub mod eval;
pub mod forest;
pub mod logistic;
pub mod model;
pub mod threshold;

pub use eval::{evaluate, EvalReport};
pub use forest::{FeatureSubsample, ForestHyper, RandomForest};
pub use logistic::{LogisticHyper, LogisticModel, LogisticSolver};
pub use model::{
    drop_features, ensemble_average, Algorithm, EnsembleThreshold, ModelKind, ModelParams, ThresholdTuning,
    TrainedModel, TrainingRecipe,
};
pub use threshold::{tune_threshold, Tuned};
