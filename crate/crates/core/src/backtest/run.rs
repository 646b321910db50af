use serde::{Deserialize, Serialize};

use super::report::{BacktestReport, WindowRecord};
use super::rmse;
use crate::error::{Error, Result};
use crate::models::{Dataset, Fitter, Forecaster};

pub const TRAIN_FRACTION: f64 = 0.9;

/// Number of leading steps used for training in a split backtest.
pub fn split_point(steps: usize) -> usize {
    (steps as f64 * TRAIN_FRACTION).floor() as usize
}

/// Non-overlapping forecast origins covering `[train_end, steps)`; the last
/// window may be shorter than the horizon.
pub fn test_origins(train_end: usize, steps: usize, horizon: usize) -> Vec<usize> {
    (train_end..steps).step_by(horizon.max(1)).collect()
}

fn score(model: &dyn Forecaster, data: &Dataset, region: usize, origin: usize, fitter: &dyn Fitter) -> Result<WindowRecord> {
    let sample = data.sample(region, origin, fitter.window())?;
    let mut predicted = model.predict(&sample)?;
    predicted.truncate(sample.label.len());
    let rmse = rmse(&predicted, &sample.label)?;
    Ok(WindowRecord { region: sample.region, origin, predicted, actual: sample.label, rmse })
}

/// Fit once on the first 90% of the grid and score every region on the
/// held-out windows.
pub fn evaluate_split(fitter: &dyn Fitter, data: &Dataset) -> Result<BacktestReport> {
    let steps = data.len();
    let train_end = split_point(steps);
    let window = fitter.window();
    if train_end < window.input_len + window.horizon || train_end >= steps {
        return Err(Error::invalid(format!(
            "a {steps}-step series leaves no room for a {}+{} window split",
            window.input_len, window.horizon
        )));
    }
    let samples = data.training_samples(window, train_end)?;
    let model = fitter.fit(&samples)?;
    let mut records = Vec::new();
    for r in 0..data.regions().len() {
        for origin in test_origins(train_end, steps, window.horizon) {
            records.push(score(model.as_ref(), data, r, origin, fitter)?);
        }
    }
    Ok(BacktestReport { model: fitter.name(), covariates: String::new(), mode: "split".into(), steps, records })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpandingConfig {
    pub initial: usize,
    pub step: usize,
}

impl Default for ExpandingConfig {
    fn default() -> Self {
        Self { initial: 24, step: 3 }
    }
}

/// Refit from scratch at every origin on windows whose labels end at or
/// before it, then forecast the next horizon for every region.
pub fn evaluate_expanding(fitter: &dyn Fitter, data: &Dataset, cfg: ExpandingConfig) -> Result<BacktestReport> {
    let steps = data.len();
    let window = fitter.window();
    if cfg.step == 0 {
        return Err(Error::Config("expanding step must be at least 1".into()));
    }
    if cfg.initial < window.input_len + window.horizon || cfg.initial >= steps {
        return Err(Error::Config(format!(
            "initial training span {} must cover one {}+{} window and leave test steps in a {steps}-step series",
            cfg.initial, window.input_len, window.horizon
        )));
    }
    let mut records = Vec::new();
    for origin in (cfg.initial..steps).step_by(cfg.step) {
        let samples = data.training_samples(window, origin)?;
        let model = fitter.fit(&samples)?;
        log::info!("{}: origin {origin}, {} training windows", fitter.name(), samples.len());
        for r in 0..data.regions().len() {
            records.push(score(model.as_ref(), data, r, origin, fitter)?);
        }
    }
    Ok(BacktestReport { model: fitter.name(), covariates: String::new(), mode: "expanding".into(), steps, records })
}
