use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::AuditConfigFile;
use crate::audit::{audit, prepare_training, render_text, AuditReport};
use crate::data::{compute_stats, load_csv, train_test_split, Dataset, SchemaHint};
use crate::error::{Error, Result};
use crate::lime::{explain_instance, Discretizer, LimeConfig, LocalExplanation};
use crate::models::drop_features;
use crate::seed;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn output_dir(cfg: &AuditConfigFile) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    Ok(&cfg.output)
}

/// Loads the configured dataset and splits it into train and test.
pub fn load_split(cfg: &AuditConfigFile) -> Result<(Dataset, Dataset)> {
    let hint = cfg.schema.as_ref().map(SchemaHint::load).transpose()?;
    let data = load_csv(&cfg.dataset, hint.as_ref())?;
    train_test_split(&data, cfg.test_fraction, seed::derive(cfg.seed, "split", 0))
}

pub struct AuditOutput {
    pub report: AuditReport,
    pub text: String,
    pub json_path: PathBuf,
    pub text_path: PathBuf,
}

/// Full audit; writes `report.json` and `report.txt` to the output directory.
pub fn cmd_audit(cfg: &AuditConfigFile) -> Result<AuditOutput> {
    let (train, test) = load_split(cfg)?;
    let lcfg = cfg.limeout_config();
    lcfg.validate(&train)?;
    let report = audit(&cfg.recipe(), &train, &test, &lcfg)?.report;
    let dir = output_dir(cfg)?;
    let json_path = dir.join("report.json");
    let text_path = dir.join("report.txt");
    let text = render_text(&report);
    write_file(&json_path, &report.to_json()?)?;
    write_file(&text_path, &text)?;
    Ok(AuditOutput {
        report,
        text,
        json_path,
        text_path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainOutput {
    /// Row index in the test split.
    pub row: usize,
    pub values: Vec<String>,
    pub label: String,
    pub dropped: Vec<String>,
    pub model_threshold: f64,
    pub explanation: LocalExplanation,
}

/// Explains test row `index` under the baseline model, or under a model
/// retrained without `drop`. Writes `explanation-<index>.json`.
pub fn cmd_explain(cfg: &AuditConfigFile, index: usize, drop: &[String]) -> Result<(ExplainOutput, PathBuf)> {
    let (train, test) = load_split(cfg)?;
    if index >= test.n_rows() {
        return Err(Error::argument(format!(
            "row {index} is out of range: the test split has {} rows",
            test.n_rows()
        )));
    }
    let lcfg = cfg.limeout_config();
    lcfg.validate(&train)?;
    let recipe = cfg.recipe();
    let (fit, tuning) = prepare_training(&train, &lcfg, lcfg.seed)?;
    let model_seed = seed::derive(lcfg.seed, "baseline", 0);
    let model = if drop.is_empty() {
        recipe.fit(&fit, tuning.as_ref(), model_seed)?
    } else {
        drop_features(&recipe, &fit, tuning.as_ref(), drop, model_seed)?
    };
    let disc = Discretizer::new(compute_stats(&fit, lcfg.quantiles)?);
    let lime = LimeConfig {
        seed: seed::derive(seed::derive(lcfg.seed, "global", 0), "explain", index as u64),
        ..lcfg.global.lime
    };
    let explanation = explain_instance(&model, test.row(index), &disc, &lime)?;
    let mut values = test.decode_row(index);
    let label = values.pop().unwrap_or_default();
    let out = ExplainOutput {
        row: index,
        values,
        label,
        dropped: drop.to_vec(),
        model_threshold: model.decision_threshold,
        explanation,
    };
    let path = output_dir(cfg)?.join(format!("explanation-{index}.json"));
    let json = serde_json::to_string_pretty(&out).map_err(|e| Error::Serde(e.to_string()))?;
    write_file(&path, &json)?;
    Ok((out, path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankChange {
    pub feature: String,
    pub rank_a: Option<usize>,
    pub rank_b: Option<usize>,
    pub sensitive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub accuracy_a: f64,
    pub accuracy_b: f64,
    /// `b - a`.
    pub accuracy_delta: f64,
    pub verdict_a: String,
    pub verdict_b: String,
    /// Features whose final rank differs, in the order of `a`'s ranking.
    pub rank_changes: Vec<RankChange>,
}

impl Comparison {
    pub fn sensitive_changes(&self) -> impl Iterator<Item = &RankChange> {
        self.rank_changes.iter().filter(|c| c.sensitive)
    }

    pub fn is_empty(&self) -> bool {
        self.rank_changes.is_empty() && self.accuracy_delta == 0.0 && self.verdict_a == self.verdict_b
    }
}

fn read_report(path: &Path) -> Result<AuditReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AuditReport::from_json(&text)
}

/// Diff of the final rankings and accuracies of two saved reports.
pub fn cmd_compare(a: &Path, b: &Path) -> Result<Comparison> {
    let (ra, rb) = (read_report(a)?, read_report(b)?);
    if ra.dataset.features != rb.dataset.features || ra.dataset.target != rb.dataset.target {
        return Err(Error::Comparison(format!(
            "{} and {} describe different datasets",
            a.display(),
            b.display()
        )));
    }
    let sensitive: Vec<&String> = ra.config.sensitive.iter().chain(&rb.config.sensitive).collect();
    let (ga, gb) = (&ra.global_after, &rb.global_after);
    let mut features: Vec<&String> = ga.ranking.iter().collect();
    features.extend(gb.ranking.iter().filter(|f| !ga.ranking.contains(f)));
    let rank_changes = features
        .into_iter()
        .filter_map(|f| {
            let (rank_a, rank_b) = (ga.rank_of(f), gb.rank_of(f));
            (rank_a != rank_b).then(|| RankChange {
                feature: f.clone(),
                rank_a,
                rank_b,
                sensitive: sensitive.contains(&f),
            })
        })
        .collect();
    let (accuracy_a, accuracy_b) = (ra.final_eval().accuracy, rb.final_eval().accuracy);
    Ok(Comparison {
        accuracy_a,
        accuracy_b,
        accuracy_delta: accuracy_b - accuracy_a,
        verdict_a: ra.verdict_after.verdict.to_string(),
        verdict_b: rb.verdict_after.verdict.to_string(),
        rank_changes,
    })
}

pub fn render_comparison(c: &Comparison) -> String {
    let rank = |r: Option<usize>| r.map_or_else(|| "-".to_string(), |r| r.to_string());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "accuracy: {:.4} -> {:.4} (delta {:+.4})",
        c.accuracy_a, c.accuracy_b, c.accuracy_delta
    );
    let _ = writeln!(out, "verdict: {} -> {}", c.verdict_a, c.verdict_b);
    if c.rank_changes.is_empty() {
        let _ = writeln!(out, "rankings are identical");
        return out;
    }
    let _ = writeln!(out, "rank changes (! sensitive):");
    for ch in &c.rank_changes {
        let _ = writeln!(
            out,
            "{} {}: {} -> {}",
            if ch.sensitive { "!" } else { " " },
            ch.feature,
            rank(ch.rank_a),
            rank(ch.rank_b)
        );
    }
    out
}
