use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::covariates::{CovariateSet, MISSING_FLAG_SUFFIX};
use crate::error::{Error, Result};
use crate::panel::{RegionId, SeriesPanel, TimeGrid};

/// Lookback and forecast horizon, in grid steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowSpec {
    pub input_len: usize,
    pub horizon: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { input_len: 12, horizon: 3 }
    }
}

impl WindowSpec {
    pub fn new(input_len: usize, horizon: usize) -> Result<Self> {
        if input_len == 0 || horizon == 0 {
            return Err(Error::Config("input_len and horizon must be at least 1".into()));
        }
        Ok(Self { input_len, horizon })
    }
}

/// One training or inference window.
///
/// `origin` is the first forecast step: inputs cover
/// `[origin - input_len, origin)` and the label starts at `origin`. Labels
/// of inference windows at the end of a series may be shorter than the
/// horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedSample {
    pub region: RegionId,
    pub origin: usize,
    pub target_window: Vec<f64>,
    /// Channel-major: `covariate_windows[c][i]`.
    pub covariate_windows: Vec<Vec<f64>>,
    pub static_vec: Vec<f64>,
    pub label: Vec<f64>,
}

impl SupervisedSample {
    pub fn input_len(&self) -> usize {
        self.target_window.len()
    }

    pub fn last_target(&self) -> f64 {
        *self.target_window.last().expect("non-empty window")
    }

    /// `[target - anchor | covariates (channel-major) | statics]`.
    pub fn features(&self, anchor: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.feature_len());
        out.extend(self.target_window.iter().map(|v| v - anchor));
        for c in &self.covariate_windows {
            out.extend_from_slice(c);
        }
        out.extend_from_slice(&self.static_vec);
        out
    }

    pub fn feature_len(&self) -> usize {
        self.input_len() * (1 + self.covariate_windows.len()) + self.static_vec.len()
    }
}

/// Dimensions every model is built against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputShape {
    pub input_len: usize,
    pub horizon: usize,
    pub n_covariates: usize,
    pub n_static: usize,
}

impl InputShape {
    pub fn of(sample: &SupervisedSample, horizon: usize) -> Self {
        Self {
            input_len: sample.input_len(),
            horizon,
            n_covariates: sample.covariate_windows.len(),
            n_static: sample.static_vec.len(),
        }
    }

    pub fn feature_len(&self) -> usize {
        self.input_len * (1 + self.n_covariates) + self.n_static
    }

    pub(crate) fn check(&self, sample: &SupervisedSample) -> Result<()> {
        if sample.input_len() != self.input_len
            || sample.covariate_windows.len() != self.n_covariates
            || sample.static_vec.len() != self.n_static
            || sample.covariate_windows.iter().any(|c| c.len() != self.input_len)
        {
            return Err(Error::invalid(format!(
                "sample for {} at origin {} does not match the model input shape",
                sample.region, sample.origin
            )));
        }
        Ok(())
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    let m = values.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Normalized targets and covariates for every region, aligned on one grid
/// and ready for windowing.
///
/// Per-region dynamic channels are max-abs scaled per region; missingness
/// flags and shared calendar channels are used as is; statics are max-abs
/// scaled per attribute across regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    grid: TimeGrid,
    regions: Vec<RegionId>,
    targets: Vec<Vec<f64>>,
    channel_names: Vec<String>,
    channels: Vec<Vec<Vec<f64>>>,
    static_names: Vec<String>,
    statics: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn assemble(panel: &SeriesPanel, covariates: Option<&CovariateSet>) -> Result<Self> {
        if !panel.is_normalized() {
            return Err(Error::invalid("model inputs must come from a normalized panel"));
        }
        let grid = *panel.grid();
        let regions: Vec<RegionId> = panel.regions().cloned().collect();
        let targets: Vec<Vec<f64>> = panel.iter().map(|(_, v)| v.to_vec()).collect();
        let mut channel_names = Vec::new();
        let mut channels = vec![Vec::new(); regions.len()];
        let mut static_names = Vec::new();
        let mut statics = vec![Vec::new(); regions.len()];

        if let Some(set) = covariates {
            if set.grid() != &grid {
                return Err(Error::invalid("covariate grid differs from the panel grid"));
            }
            for (name, values) in set.shared() {
                channel_names.push(name.clone());
                for per_region in channels.iter_mut() {
                    per_region.push(values.clone());
                }
            }
            for name in set.dynamic_names() {
                for (i, region) in regions.iter().enumerate() {
                    let ch = set
                        .channel(region, &name)
                        .ok_or_else(|| Error::channel(&name, format!("missing for {region}")))?;
                    let mut values = ch.dense()?;
                    if !name.ends_with(MISSING_FLAG_SUFFIX) {
                        let s = max_abs(values.iter().copied());
                        values.iter_mut().for_each(|v| *v /= s);
                    }
                    channels[i].push(values);
                }
                channel_names.push(name);
            }
            static_names = set.static_names();
            let mut raw: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for name in &static_names {
                let column: Vec<f64> = regions
                    .iter()
                    .map(|r| {
                        set.static_value(r, name)
                            .ok_or_else(|| Error::invalid(format!("static `{name}` missing for {r}")))
                    })
                    .collect::<Result<_>>()?;
                raw.insert(name, column);
            }
            for name in &static_names {
                let column = &raw[name.as_str()];
                let s = max_abs(column.iter().copied());
                for (i, v) in column.iter().enumerate() {
                    statics[i].push(v / s);
                }
            }
        }
        Ok(Self { grid, regions, targets, channel_names, channels, static_names, statics })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn regions(&self) -> &[RegionId] {
        &self.regions
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn static_names(&self) -> &[String] {
        &self.static_names
    }

    pub fn target(&self, region: usize) -> &[f64] {
        &self.targets[region]
    }

    pub fn target_mut(&mut self, region: usize) -> &mut [f64] {
        &mut self.targets[region]
    }

    /// Normalized dynamic covariates of `region`, channel-major.
    pub fn channels(&self, region: usize) -> &[Vec<f64>] {
        &self.channels[region]
    }

    pub fn channels_mut(&mut self, region: usize) -> &mut [Vec<f64>] {
        &mut self.channels[region]
    }

    pub fn statics(&self, region: usize) -> &[f64] {
        &self.statics[region]
    }

    /// Window for `region` at `origin`; the label is clipped to the grid.
    pub fn sample(&self, region: usize, origin: usize, spec: WindowSpec) -> Result<SupervisedSample> {
        if origin < spec.input_len || origin >= self.len() {
            return Err(Error::invalid(format!("origin {origin} has no complete input window")));
        }
        let inputs = origin - spec.input_len..origin;
        let label_end = (origin + spec.horizon).min(self.len());
        Ok(SupervisedSample {
            region: self.regions[region].clone(),
            origin,
            target_window: self.targets[region][inputs.clone()].to_vec(),
            covariate_windows: self.channels[region].iter().map(|c| c[inputs.clone()].to_vec()).collect(),
            static_vec: self.statics[region].clone(),
            label: self.targets[region][origin..label_end].to_vec(),
        })
    }

    /// Every full training window whose label ends at or before `end`,
    /// pooled across regions (region-major, then origin).
    pub fn training_samples(&self, spec: WindowSpec, end: usize) -> Result<Vec<SupervisedSample>> {
        let end = end.min(self.len());
        if end < spec.input_len + spec.horizon {
            return Err(Error::invalid(format!(
                "span of {end} steps is shorter than input_len + horizon = {}",
                spec.input_len + spec.horizon
            )));
        }
        let mut out = Vec::new();
        for r in 0..self.regions.len() {
            for origin in spec.input_len..=end - spec.horizon {
                out.push(self.sample(r, origin, spec)?);
            }
        }
        Ok(out)
    }
}

/// Windows over the whole panel, pooled across regions.
pub fn make_supervised(
    panel: &SeriesPanel,
    covariates: Option<&CovariateSet>,
    spec: WindowSpec,
) -> Result<Vec<SupervisedSample>> {
    let data = Dataset::assemble(panel, covariates)?;
    data.training_samples(spec, data.len())
}
