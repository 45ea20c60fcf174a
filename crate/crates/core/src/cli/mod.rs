//! Command-line front end: argument parsing, config files and the
//! `audit`, `explain` and `compare` commands.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_audit, cmd_compare, cmd_explain, load_split, render_comparison, AuditOutput, Comparison, ExplainOutput,
    RankChange,
};
pub use config::{AuditConfigFile, BalanceSection, GlobalSection, LimeSection, ModelName, ModelSection, TuningName};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "limeout",
    version,
    about = "Audit a classifier for reliance on sensitive features"
)]
pub struct Cli {
    /// TOML audit configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Size of the top-k window.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Comma-separated sensitive features.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sensitive: Option<Vec<String>>,
    /// Any config key, e.g. `--set lime.n_samples=1000` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explain, assess and repair the configured model; writes report.json and report.txt.
    Audit,
    /// Explain one test row; writes explanation-<index>.json.
    Explain {
        index: usize,
        /// Explain a model retrained without these features.
        #[arg(long, value_delimiter = ',')]
        drop: Vec<String>,
    },
    /// Compare the final rankings and accuracy of two reports.
    Compare { a: PathBuf, b: PathBuf },
}

impl Cli {
    /// Loads the config file and applies `--set` assignments, then the named flags.
    pub fn resolved_config(&self) -> Result<AuditConfigFile> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Error::config("config", "this command needs --config <file>"))?;
        let mut cfg = AuditConfigFile::load_with(path, &self.sets)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(s) = &self.sensitive {
            cfg.sensitive = s.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a parsed command line, printing results to stdout.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Audit => {
            let out = cmd_audit(&cli.resolved_config()?)?;
            print!("{}", out.text);
            println!("\nwrote {} and {}", out.json_path.display(), out.text_path.display());
        }
        Command::Explain { index, drop } => {
            let out = cmd_explain(&cli.resolved_config()?, *index, drop)?;
            println!("wrote {}", out.1.display());
        }
        Command::Compare { a, b } => {
            let c = cmd_compare(a, b)?;
            print!("{}", render_comparison(&c));
        }
    }
    Ok(())
}
