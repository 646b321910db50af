//! Command-line front end. Every subcommand reads a TOML run configuration
//! and writes its artifacts under `--out`.

mod commands;
mod config;
mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{backtest, compare, fill_eval, ingest, sparsity, synth, BacktestArtifacts};
pub use config::{
    BacktestConfig, CompareConfig, CompareScore, CovariateConfig, DataPaths, FillEvalConfig, LabeledReport, Regime,
    RunConfig,
};
pub use plot::backtest_svg;

#[derive(Debug, Parser)]
#[command(name = "panelcast", version, about = "Sparse count panel forecasting and model comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the synthetic benchmark panel.
    Synth(Common),
    /// Aggregate events into raw and normalized panels.
    Ingest(Common),
    /// Sparsity by geographic level and temporal interval.
    Sparsity(Common),
    /// Holdout comparison of gap-filling methods.
    FillEval(Common),
    /// Backtest every configured model and covariate set.
    Backtest {
        #[command(flatten)]
        common: Common,
        /// Also write SVG charts for expanding-window runs.
        #[arg(long)]
        plot: bool,
    },
    /// Friedman and Nemenyi comparison of backtest reports.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Report to include, as LABEL=PATH or a bare PATH (labelled
        /// model/covariates). Repeatable.
        #[arg(long = "report", value_name = "LABEL=PATH")]
        reports: Vec<String>,
    },
}

fn load(common: &Common) -> crate::Result<RunConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| crate::Error::Config("--config is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.train.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> crate::Result<()> {
    match cli.command {
        Command::Synth(c) => {
            let mut cfg = match &c.config {
                Some(path) => toml::from_str(&crate::files::read_to_string(path)?)
                    .map_err(|e| crate::Error::Config(format!("{}: {}", path.display(), e.message())))?,
                None => crate::synth::SynthConfig::default(),
            };
            if let Some(seed) = c.seed {
                cfg.seed = seed;
            }
            for path in synth(&cfg, &c.out)? {
                println!("{}", path.display());
            }
        }
        Command::Ingest(c) => {
            for path in ingest(&load(&c)?, &c.out)? {
                println!("{}", path.display());
            }
        }
        Command::Sparsity(c) => print!("{}", sparsity(&load(&c)?, &c.out)?.to_csv()),
        Command::FillEval(c) => print!("{}", fill_eval(&load(&c)?, &c.out)?.to_csv()),
        Command::Backtest { common, plot } => {
            let artifacts = backtest(&load(&common)?, &common.out, plot)?;
            print!("{}", artifacts.summary);
        }
        Command::Compare { common, reports } => {
            let mut cfg = match &common.config {
                Some(_) => load(&common)?,
                None => RunConfig::default(),
            };
            for spec in reports {
                let (label, path) = spec.split_once('=').unwrap_or(("", spec.as_str()));
                cfg.compare.reports.push(LabeledReport { label: label.into(), path: path.into() });
            }
            print!("{}", compare(&cfg, &common.out)?.to_text());
        }
    }
    Ok(())
}

/// Parse `args` (including the program name) and run. Returns the process
/// exit code: 0 on success, 2 for bad input or configuration, 1 when a
/// computation fails.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
