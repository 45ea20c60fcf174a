use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use limeout::cli::{cmd_audit, cmd_compare, cmd_explain, AuditConfigFile};
use limeout::Error;

/// Income depends on sex, race and hours; age and noise are irrelevant.
fn write_biased_csv(path: &Path, rows: usize, header: &str) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut out = format!("{header}\n");
    for _ in 0..rows {
        let male = rng.gen_bool(0.5);
        let hours: f64 = rng.gen_range(10.0..60.0);
        let race = ["White", "Black", "Other"][rng.gen_range(0..3)];
        let age: u32 = rng.gen_range(18..70);
        let noise: f64 = rng.gen_range(0.0..1.0);
        let score = 0.06 * (hours - 35.0)
            + if male { 1.5 } else { -1.5 }
            + if race == "White" { 1.0 } else { -0.5 }
            + rng.gen_range(-0.5..0.5);
        let label = if score > 0.0 { "high" } else { "low" };
        out.push_str(&format!(
            "{age},{hours:.1},{},{race},{noise:.3},{label}\n",
            if male { "Male" } else { "Female" }
        ));
    }
    std::fs::write(path, out).unwrap();
}

const HEADER: &str = "age,hours,sex,race,noise,income";

struct Fixture {
    dir: TempDir,
    config: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    write_biased_csv(&dir.path().join("data.csv"), 500, HEADER);
    let config = dir.path().join("audit.toml");
    std::fs::write(
        &config,
        r#"dataset = "data.csv"
sensitive = ["sex", "race"]
k = 3
seed = 7
runs = 2
output = "out"

[lime]
n_samples = 300

[global]
candidate_count = 40
budget = 8
"#,
    )
    .unwrap();
    Fixture { dir, config }
}

fn load(f: &Fixture) -> AuditConfigFile {
    AuditConfigFile::load(&f.config).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_limeout"))
}

#[test]
fn audit_is_byte_deterministic() {
    let f = fixture();
    let mut cfg = load(&f);
    let first = cmd_audit(&cfg).unwrap();
    let bytes = std::fs::read(&first.json_path).unwrap();
    cfg.output = f.dir.path().join("again");
    let second = cmd_audit(&cfg).unwrap();
    assert_eq!(bytes, std::fs::read(&second.json_path).unwrap());
    assert!(first.report.significance.is_some());
    assert!(std::fs::read_to_string(&first.text_path)
        .unwrap()
        .contains("Dropout pool"));
}

#[test]
fn unfair_verdict_still_exits_zero() {
    let f = fixture();
    let status = bin()
        .args(["--config", f.config.to_str().unwrap(), "--set", "runs=0", "audit"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let report = std::fs::read_to_string(f.dir.path().join("out/report.json")).unwrap();
    assert!(report.contains("\"schema_version\": 1"));
    assert!(report.contains("\"repaired\": true"));
}

#[test]
fn unknown_sensitive_feature_names_the_key() {
    let f = fixture();
    let mut cfg = load(&f);
    cfg.sensitive = vec!["Gender".into()];
    match cmd_audit(&cfg) {
        Err(Error::Config { key, message }) => {
            assert_eq!(key, "sensitive");
            assert!(message.contains("Gender"));
        }
        other => panic!("expected a config error, got {:?}", other.map(|o| o.json_path)),
    }
    let out = bin()
        .args(["--config", f.config.to_str().unwrap(), "--sensitive", "Gender", "audit"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`sensitive`"));
}

#[test]
fn bad_config_value_names_the_key() {
    let f = fixture();
    let out = bin()
        .args([
            "--config",
            f.config.to_str().unwrap(),
            "--set",
            "lime.n_samples=-3",
            "audit",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lime.n_samples"));
    let missing = bin()
        .args(["--config", "/nonexistent/audit.toml", "audit"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn explain_is_deterministic_and_respects_drops() {
    let f = fixture();
    let cfg = load(&f);
    let (a, path) = cmd_explain(&cfg, 0, &[]).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let (b, _) = cmd_explain(&cfg, 0, &[]).unwrap();
    assert_eq!(a, b);
    assert_eq!(bytes, std::fs::read(&path).unwrap());
    assert!(path.ends_with("explanation-0.json"));
    assert!(a.explanation.coefficient("sex").is_some());

    let (dropped, _) = cmd_explain(&cfg, 0, &["sex".to_string()]).unwrap();
    assert!(dropped.explanation.coefficient("sex").is_none());
    assert_eq!(dropped.explanation.contributions.len(), 4);
}

#[test]
fn explain_index_out_of_range() {
    let f = fixture();
    let cfg = load(&f);
    assert!(matches!(cmd_explain(&cfg, 100, &[]), Err(Error::Argument(_))));
}

#[test]
fn compare_with_itself_is_empty() {
    let f = fixture();
    let mut cfg = load(&f);
    cfg.runs = 0;
    let out = cmd_audit(&cfg).unwrap();
    let c = cmd_compare(&out.json_path, &out.json_path).unwrap();
    assert!(c.is_empty());

    // only declared sensitive features are flagged as sensitive changes
    let mut other = cfg.clone();
    other.seed = 8;
    other.output = f.dir.path().join("other");
    let out_b = cmd_audit(&other).unwrap();
    let c = cmd_compare(&out.json_path, &out_b.json_path).unwrap();
    assert_eq!(
        c.accuracy_delta,
        out_b.report.final_eval().accuracy - out.report.final_eval().accuracy
    );
    assert!(c
        .rank_changes
        .iter()
        .all(|r| r.sensitive == (r.feature == "sex" || r.feature == "race")));
}

#[test]
fn compare_rejects_different_datasets() {
    let f = fixture();
    let mut cfg = load(&f);
    cfg.runs = 0;
    let a = cmd_audit(&cfg).unwrap();

    write_biased_csv(
        &f.dir.path().join("renamed.csv"),
        500,
        "years,hours,sex,race,noise,income",
    );
    cfg.dataset = f.dir.path().join("renamed.csv");
    cfg.output = f.dir.path().join("renamed");
    let b = cmd_audit(&cfg).unwrap();
    assert!(matches!(
        cmd_compare(&a.json_path, &b.json_path),
        Err(Error::Comparison(_))
    ));
}

#[test]
fn flags_override_the_file() {
    let f = fixture();
    let out_dir = f.dir.path().join("flagged");
    let out = bin()
        .args([
            "--config",
            f.config.to_str().unwrap(),
            "--seed",
            "3",
            "--k",
            "1",
            "--set",
            "runs=0",
            "--out",
            out_dir.to_str().unwrap(),
            "audit",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    let parsed = limeout::audit::AuditReport::from_json(&report).unwrap();
    assert_eq!(parsed.config.seed, 3);
    assert_eq!(parsed.config.k, 1);
}
