//! Audit configuration file.
//!
//! ```toml
//! dataset = "../data/adult.csv"
//! schema = "../data/adult.schema.toml"
//! sensitive = ["Sex", "Race", "Marital Status"]
//! seed = 7
//! output = "../out/adult-logistic"
//!
//! [model]
//! kind = "logistic"
//!
//! [lime]
//! n_samples = 5000
//! ```
//!
//! Relative paths resolve against the file's directory. Every table and key
//! is optional except `dataset` and `sensitive`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audit::{LimeOutConfig, TuningSplit};
use crate::error::{Error, Result};
use crate::global::{Aggregation, GlobalConfig, PickStrategy, DEFAULT_BUDGET, DEFAULT_CANDIDATE_COUNT, DEFAULT_TOP_K};
use crate::lime::explain::{DEFAULT_N_SAMPLES, DEFAULT_RIDGE_LAMBDA};
use crate::lime::LimeConfig;
use crate::models::{
    Algorithm, EnsembleThreshold, FeatureSubsample, ForestHyper, LogisticHyper, LogisticSolver, ThresholdTuning,
    TrainingRecipe,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    #[default]
    Logistic,
    Forest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelName,
    pub threshold_tuning: ThresholdTuning,
    pub solver: LogisticSolver,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
    pub tolerance: Option<f64>,
    pub n_trees: Option<usize>,
    /// 0 means unlimited.
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub bootstrap: Option<bool>,
    pub feature_subsample: Option<FeatureSubsample>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: ModelName::Logistic,
            threshold_tuning: ThresholdTuning::MaxF1,
            solver: LogisticSolver::Newton,
            learning_rate: None,
            epochs: None,
            l2: None,
            tolerance: None,
            n_trees: None,
            max_depth: None,
            min_leaf: None,
            bootstrap: None,
            feature_subsample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimeSection {
    pub n_samples: usize,
    pub sigma: Option<f64>,
    pub ridge_lambda: f64,
    pub quantiles: usize,
    pub active_only: bool,
}

impl Default for LimeSection {
    fn default() -> Self {
        LimeSection {
            n_samples: DEFAULT_N_SAMPLES,
            sigma: None,
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            quantiles: crate::data::DEFAULT_QUANTILES,
            active_only: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalSection {
    pub candidate_count: usize,
    pub budget: usize,
    pub aggregation: Aggregation,
    pub pick: PickStrategy,
}

impl Default for GlobalSection {
    fn default() -> Self {
        GlobalSection {
            candidate_count: DEFAULT_CANDIDATE_COUNT,
            budget: DEFAULT_BUDGET,
            aggregation: Aggregation::Signed,
            pick: PickStrategy::Submodular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuningName {
    Holdout,
    Original,
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceSection {
    pub smote: bool,
    pub k_neighbors: usize,
    pub tuning: TuningName,
    pub tuning_fraction: f64,
    pub ensemble_threshold: EnsembleThreshold,
    pub force_repair: bool,
}

impl Default for BalanceSection {
    fn default() -> Self {
        BalanceSection {
            smote: true,
            k_neighbors: crate::data::DEFAULT_K_NEIGHBORS,
            tuning: TuningName::Holdout,
            tuning_fraction: 0.1,
            ensemble_threshold: EnsembleThreshold::MemberMean,
            force_repair: false,
        }
    }
}

fn default_k() -> usize {
    DEFAULT_TOP_K
}
fn default_test_fraction() -> f64 {
    0.2
}
fn default_runs() -> usize {
    10
}
fn default_correlation() -> f64 {
    crate::data::DEFAULT_CORRELATION_THRESHOLD
}
fn default_output() -> PathBuf {
    PathBuf::from("limeout-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfigFile {
    pub dataset: PathBuf,
    pub schema: Option<PathBuf>,
    pub sensitive: Vec<String>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_correlation")]
    pub correlation_threshold: f64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub lime: LimeSection,
    #[serde(default)]
    pub global: GlobalSection,
    #[serde(default)]
    pub balance: BalanceSection,
}

/// Dotted key at the line holding byte `offset` of a TOML document.
fn key_at(src: &str, offset: usize) -> Option<String> {
    let mut table = String::new();
    let mut start = 0;
    for line in src.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            table = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if offset < start + line.len() {
            let key = trimmed.split('=').next()?.trim().trim_matches('"');
            if trimmed.starts_with('[') || key.is_empty() {
                return Some(table);
            }
            return Some(if table.is_empty() {
                key.to_string()
            } else {
                format!("{table}.{key}")
            });
        }
        start += line.len();
    }
    None
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `a.b=value` assignments to a TOML document.
fn apply_sets(src: &str, sets: &[String]) -> Result<String> {
    let mut doc: toml::Table = toml::from_str(src).map_err(|e| Error::config("config", e.message()))?;
    for set in sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| Error::config(set.as_str(), "expected key=value"))?;
        let key = key.trim();
        let mut parts: Vec<&str> = key.split('.').collect();
        let leaf = parts
            .pop()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| Error::config(key, "empty key"))?;
        let mut table = &mut doc;
        for part in parts {
            table = table
                .entry(part)
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| Error::config(key, format!("`{part}` is not a table")))?;
        }
        table.insert(leaf.to_string(), parse_value(raw.trim()));
    }
    toml::to_string(&doc).map_err(|e| Error::Serde(e.to_string()))
}

impl AuditConfigFile {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| {
            let message = e.message().to_string();
            let quoted = message.split('`').nth(1).map(str::to_string);
            let key = if message.starts_with("missing field") {
                quoted
            } else {
                e.span()
                    .and_then(|s| key_at(src, s.start))
                    .filter(|k| !k.is_empty())
                    .or(quoted)
            }
            .unwrap_or_else(|| "config".to_string());
            Error::config(key, message)
        })
    }

    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::load_with(path, &[])
    }

    /// Like [`load`](Self::load), with `key=value` assignments (dotted keys,
    /// TOML values, bare words as strings) applied before parsing.
    pub fn load_with(path: impl AsRef<Path>, sets: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let mut text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if !sets.is_empty() {
            text = apply_sets(&text, sets)?;
        }
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        cfg.dataset = base.join(&cfg.dataset);
        cfg.schema = cfg.schema.map(|s| base.join(s));
        cfg.output = base.join(&cfg.output);
        Ok(cfg)
    }

    /// Range checks that do not need the dataset.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if let Some(lr) = m.learning_rate {
            if !(lr > 0.0) {
                return Err(Error::config("model.learning_rate", "must be positive"));
            }
        }
        if let Some(l2) = m.l2 {
            if !(l2 >= 0.0) {
                return Err(Error::config("model.l2", "must be non-negative"));
            }
        }
        if let Some(t) = m.tolerance {
            if !(t >= 0.0) {
                return Err(Error::config("model.tolerance", "must be non-negative"));
            }
        }
        if m.n_trees == Some(0) {
            return Err(Error::config("model.n_trees", "must be at least 1"));
        }
        if m.min_leaf == Some(0) {
            return Err(Error::config("model.min_leaf", "must be at least 1"));
        }
        if self.runs == 1 {
            return Err(Error::config(
                "runs",
                "use 0 to skip the significance test or at least 2",
            ));
        }
        Ok(())
    }

    pub fn recipe(&self) -> TrainingRecipe {
        let m = &self.model;
        let algorithm = match m.kind {
            ModelName::Logistic => {
                let base = match m.solver {
                    LogisticSolver::Newton => LogisticHyper::default(),
                    LogisticSolver::GradientDescent => LogisticHyper::gradient_descent(),
                };
                Algorithm::Logistic(LogisticHyper {
                    learning_rate: m.learning_rate.unwrap_or(base.learning_rate),
                    epochs: m.epochs.unwrap_or(base.epochs),
                    l2: m.l2.unwrap_or(base.l2),
                    tolerance: m.tolerance.unwrap_or(base.tolerance),
                    ..base
                })
            }
            ModelName::Forest => {
                let base = ForestHyper::default();
                Algorithm::Forest(ForestHyper {
                    n_trees: m.n_trees.unwrap_or(base.n_trees),
                    max_depth: m.max_depth.map_or(base.max_depth, |d| (d > 0).then_some(d)),
                    min_leaf: m.min_leaf.unwrap_or(base.min_leaf),
                    bootstrap: m.bootstrap.unwrap_or(base.bootstrap),
                    feature_subsample: m.feature_subsample.unwrap_or(base.feature_subsample),
                })
            }
        };
        TrainingRecipe {
            algorithm,
            threshold: m.threshold_tuning,
        }
    }

    pub fn limeout_config(&self) -> LimeOutConfig {
        LimeOutConfig {
            sensitive: self.sensitive.clone(),
            k: self.k,
            correlation_threshold: self.correlation_threshold,
            global: GlobalConfig {
                candidate_count: self.global.candidate_count,
                budget: self.global.budget,
                lime: LimeConfig {
                    n_samples: self.lime.n_samples,
                    sigma: self.lime.sigma,
                    ridge_lambda: self.lime.ridge_lambda,
                    seed: 0,
                    active_only: self.lime.active_only,
                },
                aggregation: self.global.aggregation,
                pick: self.global.pick,
                seed: 0,
            },
            quantiles: self.lime.quantiles,
            oversample: self.balance.smote,
            smote_k: self.balance.k_neighbors,
            tuning: match self.balance.tuning {
                TuningName::Holdout => TuningSplit::Holdout {
                    fraction: self.balance.tuning_fraction,
                },
                TuningName::Original => TuningSplit::Original,
                TuningName::Balanced => TuningSplit::Balanced,
            },
            ensemble_threshold: self.balance.ensemble_threshold,
            test_fraction: self.test_fraction,
            runs: self.runs,
            force_repair: self.balance.force_repair,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dataset = "d.csv"
sensitive = ["Sex"]
"#;

    #[test]
    fn defaults_fill_in() {
        let c = AuditConfigFile::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.k, 10);
        assert_eq!(c.runs, 10);
        assert_eq!(c.recipe(), TrainingRecipe::logistic());
        let l = c.limeout_config();
        assert_eq!(l.global.lime.n_samples, 5000);
        assert_eq!(l.tuning, TuningSplit::Holdout { fraction: 0.1 });
    }

    #[test]
    fn forest_section() {
        let c = AuditConfigFile::from_toml_str(&format!(
            "{MINIMAL}\n[model]\nkind = \"forest\"\nn_trees = 7\nmax_depth = 0\nthreshold_tuning = \"off\"\n"
        ))
        .unwrap();
        match c.recipe().algorithm {
            Algorithm::Forest(h) => {
                assert_eq!(h.n_trees, 7);
                assert_eq!(h.max_depth, None);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.recipe().threshold, ThresholdTuning::Off);
    }

    #[test]
    fn errors_name_the_key() {
        let bad_type = format!("{MINIMAL}\n[lime]\nn_samples = \"many\"\n");
        match AuditConfigFile::from_toml_str(&bad_type).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "lime.n_samples"),
            e => panic!("{e}"),
        }
        let unknown = format!("{MINIMAL}\nbudgett = 3\n");
        match AuditConfigFile::from_toml_str(&unknown).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "budgett"),
            e => panic!("{e}"),
        }
        match AuditConfigFile::from_toml_str("sensitive = [\"a\"]\n").unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "dataset"),
            e => panic!("{e}"),
        }
        let mut c = AuditConfigFile::from_toml_str(MINIMAL).unwrap();
        c.runs = 1;
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "runs"));
        let c = AuditConfigFile::from_toml_str(MINIMAL).unwrap();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn sets_override_nested_keys() {
        let sets = [
            "lime.n_samples=250".to_string(),
            "model.kind=forest".to_string(),
            "seed = 9".to_string(),
            "sensitive=[\"Sex\", \"Race\"]".to_string(),
        ];
        let text = apply_sets(MINIMAL, &sets).unwrap();
        let c = AuditConfigFile::from_toml_str(&text).unwrap();
        assert_eq!(c.lime.n_samples, 250);
        assert_eq!(c.model.kind, ModelName::Forest);
        assert_eq!(c.seed, 9);
        assert_eq!(c.sensitive, vec!["Sex", "Race"]);
        let bad = apply_sets(MINIMAL, &["lime.n_samples=lots".to_string()]).unwrap();
        match AuditConfigFile::from_toml_str(&bad).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "lime.n_samples"),
            e => panic!("{e}"),
        }
    }
}
