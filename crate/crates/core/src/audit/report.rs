//! Plain-text rendering of audit reports and global explanations.

use std::fmt::Write;

use super::run::AuditReport;
use crate::global::{FairnessVerdict, GlobalExplanation};

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn mark(feature: &str, sensitive: &[String]) -> String {
    if sensitive.iter().any(|s| s == feature) {
        format!("{feature} *")
    } else {
        feature.to_string()
    }
}

/// `(feature, contribution)` lines for the top `k`, sensitive features starred.
fn table_rows(g: &GlobalExplanation, sensitive: &[String], k: usize) -> Vec<(String, String)> {
    g.ranked()
        .into_iter()
        .take(k)
        .map(|(f, c)| (mark(&f, sensitive), format!("{c:.6}")))
        .collect()
}

fn verdict_line(v: &FairnessVerdict) -> String {
    if v.sensitive_in_top_k.is_empty() {
        format!("{} (no sensitive feature in the top {})", v.verdict, v.k)
    } else {
        format!("{} ({} in the top {})", v.verdict, v.sensitive_in_top_k.join(", "), v.k)
    }
}

/// Two-column feature table followed by the verdict.
pub fn render_global(g: &GlobalExplanation, sensitive: &[String], verdict: &FairnessVerdict) -> String {
    let rows = table_rows(g, sensitive, g.ranking.len());
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("Feature".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<w$}  {:>12}", "Feature", "Contribution");
    for (f, c) in rows {
        let _ = writeln!(out, "{f:<w$}  {c:>12}");
    }
    let _ = writeln!(out, "\nverdict: {}", verdict_line(verdict));
    out
}

/// Human-readable audit report.
pub fn render_text(r: &AuditReport) -> String {
    let cfg = &r.config;
    let mut out = String::new();
    let _ = writeln!(out, "LimeOut audit report (schema {})", r.schema_version);
    let _ = writeln!(
        out,
        "dataset: {} features, target `{}` ({} / {}), {} train rows ({} fitted, {} for thresholds), {} test rows",
        r.dataset.features.len(),
        r.dataset.target,
        r.dataset.class_labels[0],
        r.dataset.class_labels[1],
        r.dataset.train_rows,
        r.dataset.fit_rows,
        r.dataset.tuning_rows,
        r.dataset.test_rows
    );
    let _ = writeln!(out, "model: {}", serde_json::to_string(&r.recipe).unwrap_or_default());
    let _ = writeln!(
        out,
        "seed {}; sensitive: {}; top k = {}",
        cfg.seed,
        cfg.sensitive.join(", "),
        cfg.k
    );
    let _ = writeln!(
        out,
        "explanations: {} candidates, pick budget {}, {} samples, sigma {}, ridge lambda {}",
        cfg.global.candidate_count,
        cfg.global.budget,
        cfg.global.lime.n_samples,
        cfg.global
            .lime
            .sigma
            .map_or_else(|| "0.75 * columns".to_string(), |s| s.to_string()),
        cfg.global.lime.ridge_lambda
    );

    let _ = writeln!(
        out,
        "\nbaseline: accuracy {}, F1 {:.4}, threshold {:.4}",
        pct(r.baseline_eval.accuracy),
        r.baseline_eval.f1,
        r.baseline_threshold
    );
    let _ = writeln!(out, "verdict before: {}", verdict_line(&r.verdict_before));

    let k = cfg.k;
    let left = table_rows(&r.global_before, &cfg.sensitive, k);
    let right = if r.repaired {
        table_rows(&r.global_after, &cfg.sensitive, k)
    } else {
        Vec::new()
    };
    let lw = left.iter().map(|x| x.0.len()).max().unwrap_or(0).max(7);
    let rw = right.iter().map(|x| x.0.len()).max().unwrap_or(0).max(7);
    let _ = writeln!(out, "\nTop {k} features (* sensitive)");
    if r.repaired {
        let _ = writeln!(out, "{:<w$}   {:<v$}", "baseline", "ensemble", w = lw + 14, v = rw + 14);
        let _ = writeln!(
            out,
            "{:<lw$}  {:>12} | {:<rw$}  {:>12}",
            "Feature", "Contribution", "Feature", "Contribution"
        );
    } else {
        let _ = writeln!(out, "{:<lw$}  {:>12}", "Feature", "Contribution");
    }
    for i in 0..left.len().max(right.len()) {
        let (lf, lc) = left.get(i).cloned().unwrap_or_default();
        if r.repaired {
            let (rf, rc) = right.get(i).cloned().unwrap_or_default();
            let _ = writeln!(out, "{lf:<lw$}  {lc:>12} | {rf:<rw$}  {rc:>12}");
        } else {
            let _ = writeln!(out, "{lf:<lw$}  {lc:>12}");
        }
    }

    if !r.repaired {
        let _ = writeln!(out, "\nno repair: the verdict does not call for a dropout pool");
        return out;
    }
    if r.companions.values().any(|c| !c.is_empty()) {
        let _ = writeln!(out, "\ncorrelated companions:");
        for (f, c) in r.companions.iter().filter(|(_, c)| !c.is_empty()) {
            let _ = writeln!(out, "  {f}: {}", c.join(", "));
        }
    }
    let names: Vec<String> = r
        .pool
        .iter()
        .enumerate()
        .map(|(i, p)| format!("M{} without {}", i + 1, p.dropped.join(", ")))
        .collect();
    let nw = names.iter().map(String::len).max().unwrap_or(0).max(5);
    let _ = writeln!(out, "\nDropout pool");
    let _ = writeln!(
        out,
        "{:<nw$}  {:>9}  {:>7}  {:>9}",
        "Model", "Accuracy", "F1", "Threshold"
    );
    for (n, p) in names.iter().zip(&r.pool) {
        let _ = writeln!(
            out,
            "{n:<nw$}  {:>9}  {:>7.4}  {:>9.4}",
            pct(p.eval.accuracy),
            p.eval.f1,
            p.threshold
        );
    }
    if let (Some(e), Some(t)) = (r.ensemble_eval, r.ensemble_threshold) {
        let _ = writeln!(
            out,
            "{:<nw$}  {:>9}  {:>7.4}  {:>9.4}",
            "ensemble",
            pct(e.accuracy),
            e.f1,
            t
        );
    }
    let _ = writeln!(out, "verdict after: {}", verdict_line(&r.verdict_after));

    match &r.significance {
        Some(s) => {
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let _ = writeln!(
                out,
                "\nSignificance: paired t-test over {} re-splits (baseline minus ensemble)",
                s.runs
            );
            let _ = writeln!(
                out,
                "mean accuracy baseline {}, ensemble {}; t = {:.4}, p = {:.4}{}",
                pct(mean(&s.baseline_accuracy)),
                pct(mean(&s.ensemble_accuracy)),
                s.test.t_statistic,
                s.test.p_value,
                if s.test.degenerate {
                    " (degenerate: constant differences)"
                } else {
                    ""
                }
            );
        }
        None => {
            let _ = writeln!(out, "\nSignificance: not run");
        }
    }
    out
}
