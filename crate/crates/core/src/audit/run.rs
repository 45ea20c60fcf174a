use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pool::{build_dropout_pool, companions, drop_sets};
use super::significance::{paired_t_test, TTest};
use crate::data::{
    compute_stats, smote_oversample, train_test_split, Dataset, DEFAULT_CORRELATION_THRESHOLD, DEFAULT_K_NEIGHBORS,
    DEFAULT_QUANTILES,
};
use crate::error::{Error, Result};
use crate::global::{
    assess_fairness, lime_global, FairnessVerdict, GlobalConfig, GlobalExplanation, Verdict, DEFAULT_TOP_K,
};
use crate::lime::Discretizer;
use crate::models::{
    drop_features, ensemble_average, evaluate, EnsembleThreshold, EvalReport, TrainedModel, TrainingRecipe,
};
use crate::seed;

/// Version of the serialized [`AuditReport`] layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Rows used to pick decision thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "on", rename_all = "kebab-case")]
pub enum TuningSplit {
    /// Hold out this fraction of the training rows before oversampling.
    Holdout { fraction: f64 },
    /// The training rows before oversampling.
    Original,
    /// The oversampled training set the models are fitted on.
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeOutConfig {
    pub sensitive: Vec<String>,
    pub k: usize,
    pub correlation_threshold: f64,
    /// Global explanation settings; its seed is replaced by one derived from `seed`.
    pub global: GlobalConfig,
    pub quantiles: usize,
    pub oversample: bool,
    pub smote_k: usize,
    pub tuning: TuningSplit,
    pub ensemble_threshold: EnsembleThreshold,
    /// Test share of the significance re-splits.
    pub test_fraction: f64,
    /// Re-splits for the significance test; fewer than 2 skips it.
    pub runs: usize,
    /// Also repair a single-sensitive verdict.
    pub force_repair: bool,
    pub seed: u64,
}

impl Default for LimeOutConfig {
    fn default() -> Self {
        LimeOutConfig {
            sensitive: Vec::new(),
            k: DEFAULT_TOP_K,
            correlation_threshold: DEFAULT_CORRELATION_THRESHOLD,
            global: GlobalConfig::default(),
            quantiles: DEFAULT_QUANTILES,
            oversample: true,
            smote_k: DEFAULT_K_NEIGHBORS,
            tuning: TuningSplit::Holdout { fraction: 0.1 },
            ensemble_threshold: EnsembleThreshold::MemberMean,
            test_fraction: 0.2,
            runs: 10,
            force_repair: false,
            seed: 0,
        }
    }
}

impl LimeOutConfig {
    /// Checks the knobs against `data`; errors name the offending key.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.sensitive.is_empty() {
            return Err(Error::config("sensitive", "at least one sensitive feature is required"));
        }
        for f in &self.sensitive {
            if data.schema().index_of(f).is_none() {
                return Err(Error::config("sensitive", format!("unknown feature `{f}`")));
            }
        }
        if self.k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.correlation_threshold) {
            return Err(Error::config("correlation_threshold", "must lie in [0, 1]"));
        }
        if self.quantiles < 2 {
            return Err(Error::config("lime.quantiles", "must be at least 2"));
        }
        if self.global.lime.n_samples == 0 {
            return Err(Error::config("lime.n_samples", "must be at least 1"));
        }
        if let Some(s) = self.global.lime.sigma {
            if !(s > 0.0) {
                return Err(Error::config("lime.sigma", "must be positive"));
            }
        }
        if !(self.global.lime.ridge_lambda >= 0.0) {
            return Err(Error::config("lime.ridge_lambda", "must be non-negative"));
        }
        if self.global.budget == 0 {
            return Err(Error::config("global.budget", "must be at least 1"));
        }
        if self.global.candidate_count == 0 {
            return Err(Error::config("global.candidate_count", "must be at least 1"));
        }
        if self.smote_k == 0 {
            return Err(Error::config("balance.k_neighbors", "must be at least 1"));
        }
        if let TuningSplit::Holdout { fraction } = self.tuning {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::config("balance.tuning_fraction", "must lie in (0, 1)"));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config("test_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub features: Vec<String>,
    pub target: String,
    pub class_labels: [String; 2],
    pub train_rows: usize,
    pub test_rows: usize,
    pub fit_rows: usize,
    pub tuning_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub dropped: Vec<String>,
    pub seed: u64,
    pub threshold: f64,
    pub eval: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub runs: usize,
    pub baseline_accuracy: Vec<f64>,
    pub ensemble_accuracy: Vec<f64>,
    /// Differences are baseline minus ensemble.
    pub test: TTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub dataset: DatasetSummary,
    pub recipe: TrainingRecipe,
    pub config: LimeOutConfig,
    pub baseline_seed: u64,
    pub baseline_threshold: f64,
    pub baseline_eval: EvalReport,
    pub global_before: GlobalExplanation,
    pub verdict_before: FairnessVerdict,
    pub repaired: bool,
    pub companions: BTreeMap<String, Vec<String>>,
    pub pool: Vec<PoolEntry>,
    pub ensemble_threshold: Option<f64>,
    pub ensemble_eval: Option<EvalReport>,
    /// Equals `global_before` when no repair happened.
    pub global_after: GlobalExplanation,
    pub verdict_after: FairnessVerdict,
    pub significance: Option<Significance>,
}

impl AuditReport {
    /// Evaluation of the model the audit ends with.
    pub fn final_eval(&self) -> &EvalReport {
        self.ensemble_eval.as_ref().unwrap_or(&self.baseline_eval)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<AuditReport> {
        let r: AuditReport = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Serde(format!(
                "report schema version {} is not supported (expected {REPORT_SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }
}

/// Report plus the trained models behind it.
#[derive(Debug, Clone)]
pub struct Audit {
    pub report: AuditReport,
    pub baseline: TrainedModel,
    pub pool: Vec<TrainedModel>,
    pub ensemble: Option<TrainedModel>,
    pub discretizer: Discretizer,
}

impl Audit {
    pub fn final_model(&self) -> &TrainedModel {
        self.ensemble.as_ref().unwrap_or(&self.baseline)
    }
}

/// Fitting set (oversampled if enabled) and threshold tuning set.
pub fn prepare_training(train: &Dataset, cfg: &LimeOutConfig, seed_: u64) -> Result<(Dataset, Option<Dataset>)> {
    let balance = |d: &Dataset| -> Result<Dataset> {
        if cfg.oversample {
            smote_oversample(d, cfg.smote_k, seed::derive(seed_, "smote", 0))
        } else {
            Ok(d.clone())
        }
    };
    Ok(match cfg.tuning {
        TuningSplit::Holdout { fraction } => {
            let (fit, tune) = train_test_split(train, fraction, seed::derive(seed_, "tuning-split", 0))?;
            (balance(&fit)?, Some(tune))
        }
        TuningSplit::Original => (balance(train)?, Some(train.clone())),
        TuningSplit::Balanced => (balance(train)?, None),
    })
}

fn global_config(cfg: &LimeOutConfig) -> GlobalConfig {
    GlobalConfig {
        seed: seed::derive(cfg.seed, "global", 0),
        ..cfg.global
    }
}

/// Runs the audit and returns only the report.
pub fn run_limeout(
    recipe: &TrainingRecipe,
    train: &Dataset,
    test: &Dataset,
    cfg: &LimeOutConfig,
) -> Result<AuditReport> {
    audit(recipe, train, test, cfg).map(|a| a.report)
}

/// Baseline, global explanation and verdict; on an unfair verdict (or a
/// single-sensitive one with `force_repair`) the dropout pool, its ensemble,
/// the ensemble's explanation and the significance re-splits.
pub fn audit(recipe: &TrainingRecipe, train: &Dataset, test: &Dataset, cfg: &LimeOutConfig) -> Result<Audit> {
    cfg.validate(train)?;
    if test.is_empty() {
        return Err(Error::argument("the test set is empty"));
    }
    if train.schema().names() != test.schema().names() {
        return Err(Error::Schema("train and test columns differ".into()));
    }
    let (fit, tuning) = prepare_training(train, cfg, cfg.seed)?;
    let baseline_seed = seed::derive(cfg.seed, "baseline", 0);
    let baseline = recipe.fit(&fit, tuning.as_ref(), baseline_seed)?;
    let baseline_eval = evaluate(&baseline, test)?;
    let discretizer = Discretizer::new(compute_stats(&fit, cfg.quantiles)?);
    let gcfg = global_config(cfg);
    let global_before: GlobalExplanation = lime_global(&baseline, test, &discretizer, &gcfg)?;
    let verdict_before = assess_fairness(&global_before, &cfg.sensitive, cfg.k);
    let repair = match verdict_before.verdict {
        Verdict::Unfair => true,
        Verdict::SingleSensitive => cfg.force_repair,
        Verdict::Fair => false,
    };
    log::info!(
        "baseline accuracy {:.4}, verdict {}",
        baseline_eval.accuracy,
        verdict_before.verdict
    );

    let dataset = DatasetSummary {
        features: train.schema().names(),
        target: train.schema().target().to_string(),
        class_labels: train.schema().class_labels().clone(),
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        fit_rows: fit.n_rows(),
        tuning_rows: tuning.as_ref().map_or(fit.n_rows(), Dataset::n_rows),
    };
    let mut report = AuditReport {
        schema_version: REPORT_SCHEMA_VERSION,
        dataset,
        recipe: *recipe,
        config: cfg.clone(),
        baseline_seed,
        baseline_threshold: baseline.decision_threshold,
        baseline_eval,
        global_after: global_before.clone(),
        verdict_after: verdict_before.clone(),
        global_before,
        verdict_before,
        repaired: repair,
        companions: BTreeMap::new(),
        pool: Vec::new(),
        ensemble_threshold: None,
        ensemble_eval: None,
        significance: None,
    };
    if !repair {
        return Ok(Audit {
            report,
            baseline,
            pool: Vec::new(),
            ensemble: None,
            discretizer,
        });
    }

    let flagged = report.verdict_before.sensitive_in_top_k.clone();
    let comp = companions(train, &flagged, cfg.correlation_threshold)?;
    let members = build_dropout_pool(recipe, &fit, tuning.as_ref(), &flagged, &comp, cfg.seed)?;
    report.pool = members
        .iter()
        .map(|m| {
            Ok(PoolEntry {
                dropped: m.dropped.clone(),
                seed: m.seed,
                threshold: m.model.decision_threshold,
                eval: evaluate(&m.model, test)?,
            })
        })
        .collect::<Result<_>>()?;
    let pool: Vec<TrainedModel> = members.into_iter().map(|m| m.model).collect();
    let ensemble = ensemble_average(pool.clone(), cfg.ensemble_threshold)?;
    report.ensemble_threshold = Some(ensemble.decision_threshold);
    report.ensemble_eval = Some(evaluate(&ensemble, test)?);
    report.global_after = lime_global(&ensemble, test, &discretizer, &gcfg)?;
    report.verdict_after = assess_fairness(&report.global_after, &cfg.sensitive, cfg.k);
    report.companions = comp;
    if cfg.runs >= 2 {
        let sets = drop_sets(&train.schema().names(), &flagged, &report.companions);
        report.significance = Some(significance(recipe, &train.concat(test)?, &sets, cfg)?);
    }
    Ok(Audit {
        report,
        baseline,
        pool,
        ensemble: Some(ensemble),
        discretizer,
    })
}

/// Baseline and ensemble accuracy on one re-split of `all`.
pub fn resplit_accuracies(
    recipe: &TrainingRecipe,
    all: &Dataset,
    sets: &[Vec<String>],
    cfg: &LimeOutConfig,
    run: usize,
) -> Result<(f64, f64)> {
    let run_seed = seed::derive(cfg.seed, "resplit", run as u64);
    let (train, test) = train_test_split(all, cfg.test_fraction, run_seed)?;
    let (fit, tuning) = prepare_training(&train, cfg, run_seed)?;
    let baseline = recipe.fit(&fit, tuning.as_ref(), seed::derive(run_seed, "baseline", 0))?;
    let members = sets
        .iter()
        .enumerate()
        .map(|(k, dropped)| {
            drop_features(
                recipe,
                &fit,
                tuning.as_ref(),
                dropped,
                seed::derive(run_seed, "pool", k as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let ensemble = ensemble_average(members, cfg.ensemble_threshold)?;
    Ok((
        evaluate(&baseline, &test)?.accuracy,
        evaluate(&ensemble, &test)?.accuracy,
    ))
}

fn significance(
    recipe: &TrainingRecipe,
    all: &Dataset,
    sets: &[Vec<String>],
    cfg: &LimeOutConfig,
) -> Result<Significance> {
    let pairs: Vec<(f64, f64)> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| resplit_accuracies(recipe, all, sets, cfg, r))
        .collect::<Result<_>>()?;
    let (baseline_accuracy, ensemble_accuracy): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(Significance {
        runs: cfg.runs,
        test: paired_t_test(&baseline_accuracy, &ensemble_accuracy)?,
        baseline_accuracy,
        ensemble_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::Rng;

    use super::*;
    use crate::data::{Feature, FeatureSchema};
    use crate::lime::LimeConfig;

    /// Labels depend on `income` and, when `biased`, strongly on `sex`.
    fn synthetic(n: usize, biased: bool, s: u64) -> Dataset {
        let mut rng = seed::rng(s);
        let schema = Arc::new(
            FeatureSchema::new(
                vec![
                    Feature::numerical("income"),
                    Feature::categorical("sex", vec!["f".into(), "m".into()]),
                    Feature::numerical("hours"),
                    Feature::categorical("race", vec!["a".into(), "b".into(), "c".into()]),
                    Feature::numerical("noise"),
                ],
                "y",
                ["0".into(), "1".into()],
            )
            .unwrap(),
        );
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let income: f64 = rng.gen_range(0.0..1.0);
            let sex = rng.gen_range(0u8..2);
            let hours: f64 = rng.gen_range(0.0..1.0);
            let race = rng.gen_range(0u8..3);
            let mut score = 2.0 * income + 0.5 * hours;
            if biased {
                score += 1.5 * f64::from(sex) + 1.0 * f64::from(u8::from(race == 0));
            }
            labels.push(u8::from(
                score + rng.gen_range(-0.2..0.2) > if biased { 2.2 } else { 1.4 },
            ));
            rows.push(vec![
                income,
                f64::from(sex),
                hours,
                f64::from(race),
                rng.gen_range(0.0..1.0),
            ]);
        }
        Dataset::new(schema, rows, labels).unwrap()
    }

    fn cfg(sensitive: &[&str], k: usize) -> LimeOutConfig {
        LimeOutConfig {
            sensitive: sensitive.iter().map(|s| s.to_string()).collect(),
            k,
            global: GlobalConfig {
                candidate_count: 40,
                budget: 8,
                lime: LimeConfig {
                    n_samples: 400,
                    ..LimeConfig::default()
                },
                ..GlobalConfig::default()
            },
            runs: 3,
            seed: 5,
            ..LimeOutConfig::default()
        }
    }

    #[test]
    fn unbiased_labels_give_fair_verdict_and_no_pool() {
        let d = synthetic(600, false, 1);
        let (train, test) = train_test_split(&d, 0.25, 2).unwrap();
        let a = audit(&TrainingRecipe::logistic(), &train, &test, &cfg(&["sex", "race"], 2)).unwrap();
        assert_eq!(a.report.verdict_before.verdict, Verdict::Fair);
        assert!(!a.report.repaired);
        assert!(a.report.pool.is_empty() && a.ensemble.is_none());
        assert_eq!(a.report.global_after, a.report.global_before);
        assert!(a.report.significance.is_none());
    }

    #[test]
    fn biased_labels_trigger_repair() {
        let d = synthetic(800, true, 3);
        let (train, test) = train_test_split(&d, 0.25, 4).unwrap();
        let a = audit(&TrainingRecipe::logistic(), &train, &test, &cfg(&["sex", "race"], 3)).unwrap();
        let r = &a.report;
        assert_eq!(r.verdict_before.verdict, Verdict::Unfair);
        assert_eq!(r.pool.len(), r.verdict_before.sensitive_in_top_k.len() + 1);
        assert_eq!(
            r.pool.last().unwrap().dropped,
            vec!["sex".to_string(), "race".to_string()]
        );
        let after_sex = r.global_after.contribution("sex").unwrap().abs();
        assert!(after_sex < r.global_before.contribution("sex").unwrap().abs());
        let sig = r.significance.as_ref().unwrap();
        assert_eq!(sig.baseline_accuracy.len(), 3);
        assert!(a.final_model().predict_proba(test.row(0)) <= 1.0);
    }

    #[test]
    fn single_sensitive_needs_force() {
        let d = synthetic(600, true, 7);
        let (train, test) = train_test_split(&d, 0.25, 8).unwrap();
        let mut c = cfg(&["sex"], 3);
        c.runs = 0;
        let a = run_limeout(&TrainingRecipe::logistic(), &train, &test, &c).unwrap();
        assert_eq!(a.verdict_before.verdict, Verdict::SingleSensitive);
        assert!(!a.repaired);
        c.force_repair = true;
        let b = run_limeout(&TrainingRecipe::logistic(), &train, &test, &c).unwrap();
        assert!(b.repaired);
        assert_eq!(b.pool.len(), 2);
    }

    #[test]
    fn report_is_reproducible_and_round_trips() {
        let d = synthetic(400, true, 9);
        let (train, test) = train_test_split(&d, 0.25, 10).unwrap();
        let c = cfg(&["sex", "race"], 3);
        let a = run_limeout(&TrainingRecipe::logistic(), &train, &test, &c).unwrap();
        let b = run_limeout(&TrainingRecipe::logistic(), &train, &test, &c).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(AuditReport::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn unknown_sensitive_feature_names_the_key() {
        let d = synthetic(100, false, 11);
        let (train, test) = train_test_split(&d, 0.25, 12).unwrap();
        let err = run_limeout(&TrainingRecipe::logistic(), &train, &test, &cfg(&["Gender"], 3)).unwrap_err();
        match err {
            Error::Config { key, message } => {
                assert_eq!(key, "sensitive");
                assert!(message.contains("Gender"));
            }
            other => panic!("unexpected {other}"),
        }
    }
}
