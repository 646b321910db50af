use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::panel::{Level, RegionId};

/// One forecast window scored against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub region: RegionId,
    pub origin: usize,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub model: String,
    /// Covariate set the model was fed, when known.
    #[serde(default)]
    pub covariates: String,
    pub mode: String,
    /// Number of grid steps in the evaluated series.
    pub steps: usize,
    pub records: Vec<WindowRecord>,
}

impl BacktestReport {
    /// `model/covariates`, or the model name alone.
    pub fn label(&self) -> String {
        if self.covariates.is_empty() {
            self.model.clone()
        } else {
            format!("{}/{}", self.model, self.covariates)
        }
    }

    /// Mean window RMSE per region over all windows.
    pub fn per_region_mean(&self) -> BTreeMap<RegionId, f64> {
        self.mean_where(|_| true)
    }

    /// Mean window RMSE per region over windows starting in the final
    /// `steps_per_year` steps of the series.
    pub fn last_year_mean(&self, steps_per_year: usize) -> BTreeMap<RegionId, f64> {
        let cutoff = self.steps.saturating_sub(steps_per_year);
        let recent = self.mean_where(|r| r.origin >= cutoff);
        if recent.is_empty() {
            self.per_region_mean()
        } else {
            recent
        }
    }

    fn mean_where(&self, keep: impl Fn(&WindowRecord) -> bool) -> BTreeMap<RegionId, f64> {
        let mut acc: BTreeMap<RegionId, (f64, usize)> = BTreeMap::new();
        for r in self.records.iter().filter(|r| keep(r)) {
            let e = acc.entry(r.region.clone()).or_default();
            e.0 += r.rmse;
            e.1 += 1;
        }
        acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }

    /// Mean over every window of every region.
    pub fn overall_mean(&self) -> f64 {
        self.records.iter().map(|r| r.rmse).sum::<f64>() / self.records.len().max(1) as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Mean of per-region values within each geographic level.
pub fn level_summary(per_region: &BTreeMap<RegionId, f64>) -> BTreeMap<Level, f64> {
    let mut acc: BTreeMap<Level, (f64, usize)> = BTreeMap::new();
    for (region, v) in per_region {
        let e = acc.entry(region.level()).or_default();
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}
