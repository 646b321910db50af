//! Held-out and expanding-window evaluation of forecasters.

mod report;
mod run;

pub use report::{level_summary, BacktestReport, WindowRecord};
pub use run::{evaluate_expanding, evaluate_split, split_point, test_origins, ExpandingConfig, TRAIN_FRACTION};

use crate::error::{Error, Result};

/// Root mean squared error between equal-length, non-empty slices.
pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::invalid(format!(
            "rmse over {} predictions and {} actuals",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("rmse over an empty window"));
    }
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}
