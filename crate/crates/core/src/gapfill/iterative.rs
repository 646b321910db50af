use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covariates::Channel;
use crate::error::{Error, Result};

/// Round-robin regression imputer: every channel with gaps is regressed on
/// all the others (OLS with intercept) and its missing cells overwritten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterativeImputer {
    pub max_rounds: usize,
    /// Stop once the largest change of an imputed cell, relative to the
    /// largest observed magnitude, drops below this.
    pub tol: f64,
}

impl Default for IterativeImputer {
    fn default() -> Self {
        Self { max_rounds: 10, tol: 1e-3 }
    }
}

/// Result of a fitted imputation.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputationModel {
    /// Final-round coefficients per channel: `[intercept, others...]`, or
    /// `None` where the channel had no gaps or fell back to its mean.
    pub coefficients: Vec<Option<Vec<f64>>>,
    pub rounds: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    filled: Vec<Channel>,
}

impl ImputationModel {
    pub fn filled(&self) -> &[Channel] {
        &self.filled
    }

    pub fn into_filled(self) -> Vec<Channel> {
        self.filled
    }
}

/// Least squares via SVD; `None` if the design is rank deficient.
fn ols(design: &DMatrix<f64>, target: &DVector<f64>) -> Option<DVector<f64>> {
    if design.nrows() < design.ncols() {
        return None;
    }
    let svd = design.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if !(max > 0.0) || min <= max * 1e-10 {
        return None;
    }
    svd.solve(target, 0.0).ok()
}

impl IterativeImputer {
    pub fn fit(&self, channels: &[Channel]) -> Result<ImputationModel> {
        if channels.len() < 2 {
            return Err(Error::invalid("iterative imputation needs at least two channels"));
        }
        let rows = channels[0].len();
        if channels.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("channels have different lengths"));
        }
        let p = channels.len();
        let mut data = DMatrix::<f64>::zeros(rows, p);
        let mut means = vec![0.0; p];
        let mut scale = 0.0_f64;
        for (j, c) in channels.iter().enumerate() {
            let observed: Vec<f64> = c.values().iter().flatten().copied().collect();
            if observed.is_empty() {
                return Err(Error::channel(c.name(), "no observed values"));
            }
            means[j] = observed.iter().sum::<f64>() / observed.len() as f64;
            scale = observed.iter().fold(scale, |m, v| m.max(v.abs()));
            for (t, v) in c.values().iter().enumerate() {
                data[(t, j)] = v.unwrap_or(means[j]);
            }
        }
        let scale = if scale > 0.0 { scale } else { 1.0 };

        let mut coefficients = vec![None; p];
        let mut warnings = Vec::new();
        let mut converged = false;
        let mut rounds = 0;
        while rounds < self.max_rounds && !converged {
            rounds += 1;
            let mut max_change = 0.0_f64;
            for (j, c) in channels.iter().enumerate() {
                let missing: Vec<usize> = (0..rows).filter(|t| c.values()[*t].is_none()).collect();
                if missing.is_empty() {
                    continue;
                }
                let observed: Vec<usize> = (0..rows).filter(|t| c.values()[*t].is_some()).collect();
                let design_row = |data: &DMatrix<f64>, t: usize| -> Vec<f64> {
                    std::iter::once(1.0).chain((0..p).filter(|k| *k != j).map(|k| data[(t, k)])).collect()
                };
                let x = DMatrix::from_row_iterator(observed.len(), p, observed.iter().flat_map(|t| design_row(&data, *t)));
                let y = DVector::from_iterator(observed.len(), observed.iter().map(|t| data[(*t, j)]));
                let beta = ols(&x, &y);
                if beta.is_none() && coefficients[j].is_none() && rounds == 1 {
                    let msg = format!("channel `{}`: singular design, kept column-mean fill", c.name());
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
                for &t in &missing {
                    let new = match &beta {
                        Some(b) => design_row(&data, t).iter().zip(b.iter()).map(|(x, b)| x * b).sum(),
                        None => means[j],
                    };
                    max_change = max_change.max((new - data[(t, j)]).abs());
                    data[(t, j)] = new;
                }
                coefficients[j] = beta.map(|b| b.iter().copied().collect());
            }
            converged = max_change / scale < self.tol;
        }

        let filled = channels
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let values = c
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(t, v)| Some(v.unwrap_or(data[(t, j)])))
                    .collect();
                c.with_values(values)
            })
            .collect();
        Ok(ImputationModel { coefficients, rounds, converged, warnings, filled })
    }
}

/// Fit with default settings and return the filled channels.
pub fn fill_iterative(channels: &[Channel]) -> Result<Vec<Channel>> {
    Ok(IterativeImputer::default().fit(channels)?.into_filled())
}
