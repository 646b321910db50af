use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::backtest::ExpandingConfig;
use crate::covariates::LagSpec;
use crate::error::{Error, Result};
use crate::gapfill::FillMethod;
use crate::models::{ModelKind, TrainConfig, WindowSpec};
use crate::panel::Interval;
use crate::pipeline::CovariateChoice;

/// Input files. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub events: PathBuf,
    pub hierarchy: PathBuf,
    #[serde(default = "default_state")]
    pub state: String,
    #[serde(default)]
    pub r#static: Option<PathBuf>,
    /// External channel files; each channel is named after its file stem.
    #[serde(default)]
    pub channels: Vec<PathBuf>,
    #[serde(default = "default_interval")]
    pub interval: Interval,
    /// Optional explicit span; defaults to the span of the events.
    #[serde(default)]
    pub first: Option<NaiveDate>,
    #[serde(default)]
    pub last: Option<NaiveDate>,
}

fn default_state() -> String {
    "ST".into()
}

fn default_interval() -> Interval {
    Interval::Monthly
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovariateConfig {
    pub sets: Vec<CovariateChoice>,
    pub lag_steps: usize,
    pub top_k: usize,
    pub fill: FillMethod,
}

impl Default for CovariateConfig {
    fn default() -> Self {
        Self { sets: CovariateChoice::ALL.to_vec(), lag_steps: 1, top_k: 5, fill: FillMethod::ExpSmooth }
    }
}

impl CovariateConfig {
    pub fn lag(&self) -> Result<LagSpec> {
        LagSpec::new(self.lag_steps, self.top_k).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Split,
    Expanding,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Split => "split",
            Regime::Expanding => "expanding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    pub models: Vec<ModelKind>,
    pub regimes: Vec<Regime>,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self { models: ModelKind::ALL.to_vec(), regimes: vec![Regime::Split, Regime::Expanding] }
    }
}

/// Which per-region score feeds the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareScore {
    AllWindows,
    LastYear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledReport {
    /// Empty means the report's own `model/covariates` label.
    #[serde(default)]
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub reports: Vec<LabeledReport>,
    pub score: CompareScore,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { reports: Vec::new(), score: CompareScore::AllWindows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FillEvalConfig {
    pub holdout: usize,
}

impl Default for FillEvalConfig {
    fn default() -> Self {
        Self { holdout: 12 }
    }
}

/// One experiment, read from a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<DataPaths>,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub expanding: ExpandingConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub covariates: CovariateConfig,
    #[serde(default)]
    pub backtest: BacktestConfig,
    #[serde(default)]
    pub fill_eval: FillEvalConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::files::read_to_string(path)?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        WindowSpec::new(self.window.input_len, self.window.horizon)?;
        self.train.validate()?;
        self.covariates.lag()?;
        if self.expanding.step == 0 {
            return Err(Error::Config("expanding.step must be at least 1".into()));
        }
        if self.covariates.sets.is_empty() || self.backtest.models.is_empty() || self.backtest.regimes.is_empty() {
            return Err(Error::Config("covariate sets, models and regimes must be non-empty".into()));
        }
        if self.fill_eval.holdout == 0 {
            return Err(Error::Config("fill_eval.holdout must be at least 1".into()));
        }
        Ok(())
    }

    pub fn data(&self) -> Result<&DataPaths> {
        self.data.as_ref().ok_or_else(|| Error::Config("the [data] section is required for this command".into()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}
