//! Holt (additive trend) and Holt-Winters (additive trend and season)
//! exponential smoothing, with smoothing weights picked by grid search.

use serde::{Deserialize, Serialize};

use crate::covariates::Channel;
use crate::error::{Error, Result};

use super::constant::{check_end_gaps, fill_constant};

/// Minimum observations for fitting a smoother.
pub const MIN_OBSERVED: usize = 4;
/// Seasonal period used on monthly grids.
pub const SEASON: usize = 12;

/// Final smoother state after running over the observed segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmootherFit {
    pub level: f64,
    pub trend: f64,
    /// Seasonal offsets; `seasonal[i]` applies to the i-th step after the
    /// end of the segment, modulo the period.
    pub seasonal: Option<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    /// In-sample one-step squared error at the chosen weights.
    pub sse: f64,
}

impl SmootherFit {
    /// Forecast `h >= 1` steps past the end of the fitted segment.
    pub fn forecast(&self, h: usize) -> f64 {
        let base = self.level + h as f64 * self.trend;
        match &self.seasonal {
            Some(s) => base + s[(h - 1) % s.len()],
            None => base,
        }
    }
}

fn weight_grid() -> impl Iterator<Item = f64> + Clone {
    (0..=10).map(|i| i as f64 / 10.0)
}

/// One pass of Holt's recursion. Returns (sse, level, trend).
fn run_holt(y: &[f64], alpha: f64, beta: f64) -> (f64, f64, f64) {
    let mut level = y[0];
    let mut trend = y[1] - y[0];
    let mut sse = 0.0;
    for &obs in &y[1..] {
        let pred = level + trend;
        sse += (obs - pred) * (obs - pred);
        let new_level = alpha * obs + (1.0 - alpha) * pred;
        trend = beta * (new_level - level) + (1.0 - beta) * trend;
        level = new_level;
    }
    (sse, level, trend)
}

/// Initial Holt-Winters state from the first two cycles: level one step
/// before the segment, trend, and detrended seasonal offsets.
fn hw_init(y: &[f64], period: usize) -> (f64, f64, Vec<f64>) {
    let m1 = y[..period].iter().sum::<f64>() / period as f64;
    let m2 = y[period..2 * period].iter().sum::<f64>() / period as f64;
    let trend = (m2 - m1) / period as f64;
    let centre = (period as f64 - 1.0) / 2.0;
    let seasonal = (0..period)
        .map(|i| {
            let offset = trend * (i as f64 - centre);
            ((y[i] - (m1 + offset)) + (y[i + period] - (m2 + offset))) / 2.0
        })
        .collect();
    (m1 - (centre + 1.0) * trend, trend, seasonal)
}

/// One pass of additive Holt-Winters. Returns (sse, level, trend, seasonal
/// rotated so index 0 is the first step after the segment).
fn run_holt_winters(y: &[f64], period: usize, alpha: f64, beta: f64, gamma: f64) -> (f64, f64, f64, Vec<f64>) {
    let (mut level, mut trend, mut season) = hw_init(y, period);
    let mut sse = 0.0;
    for (t, &obs) in y.iter().enumerate() {
        let s = season[t % period];
        let pred = level + trend + s;
        sse += (obs - pred) * (obs - pred);
        let new_level = alpha * (obs - s) + (1.0 - alpha) * (level + trend);
        trend = beta * (new_level - level) + (1.0 - beta) * trend;
        season[t % period] = gamma * (obs - new_level) + (1.0 - gamma) * s;
        level = new_level;
    }
    let n = y.len();
    let rotated = (0..period).map(|i| season[(n + i) % period]).collect();
    (sse, level, trend, rotated)
}

/// Fit on a fully observed segment. Seasonality is used when a period is
/// given and at least two full cycles are observed.
pub fn fit_expsmooth(segment: &[f64], period: Option<usize>) -> Result<SmootherFit> {
    if segment.len() < MIN_OBSERVED {
        return Err(Error::invalid(format!(
            "exponential smoothing needs {MIN_OBSERVED} observations, got {}",
            segment.len()
        )));
    }
    let seasonal_period = period.filter(|p| *p >= 2 && segment.len() >= 2 * p);
    let mut best: Option<SmootherFit> = None;
    let mut consider = |fit: SmootherFit| {
        if best.as_ref().is_none_or(|b| fit.sse < b.sse) {
            best = Some(fit);
        }
    };
    for alpha in weight_grid() {
        for beta in weight_grid() {
            match seasonal_period {
                None => {
                    let (sse, level, trend) = run_holt(segment, alpha, beta);
                    consider(SmootherFit { level, trend, seasonal: None, alpha, beta, gamma: None, sse });
                }
                Some(p) => {
                    for gamma in weight_grid() {
                        let (sse, level, trend, s) = run_holt_winters(segment, p, alpha, beta, gamma);
                        consider(SmootherFit { level, trend, seasonal: Some(s), alpha, beta, gamma: Some(gamma), sse });
                    }
                }
            }
        }
    }
    Ok(best.expect("weight grid is non-empty"))
}

/// Fill only the trailing gap, forecasting from the originally observed
/// segment.
fn fill_trailing(channel: &Channel, period: Option<usize>) -> Result<Channel> {
    let first = channel.origin().iter().position(|o| *o);
    let last = channel.origin().iter().rposition(|o| *o);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::channel(channel.name(), "no observed values"));
    };
    if last + 1 == channel.len() || channel.values()[last + 1..].iter().all(Option::is_some) {
        return Ok(channel.clone());
    }
    let segment: Vec<f64> = channel.values()[first..=last].iter().map(|v| v.expect("observed")).collect();
    let fit = fit_expsmooth(&segment, period)?;
    let mut values = channel.values().to_vec();
    for (h, v) in values[last + 1..].iter_mut().enumerate() {
        if v.is_none() {
            *v = Some(fit.forecast(h + 1));
        }
    }
    Ok(channel.with_values(values))
}

/// Forecast the trailing gap forward and the leading gap on the
/// time-reversed series. Channels with fewer than [`MIN_OBSERVED`]
/// observations fall back to the constant fill.
pub fn fill_expsmooth(channel: &Channel, period: Option<usize>) -> Result<Channel> {
    check_end_gaps(channel)?;
    if channel.observed_count() < MIN_OBSERVED {
        log::warn!(
            "channel `{}` has {} observations; falling back to constant fill",
            channel.name(),
            channel.observed_count()
        );
        return fill_constant(channel);
    }
    let forward = fill_trailing(channel, period)?;
    Ok(fill_trailing(&forward.reversed(), period)?.reversed())
}
