use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// External channel that follows a county's intensity `lead_steps` ahead.
///
/// `noise_sd` is relative to `gain * base_rate`, so sparse and dense
/// counties get comparable signal-to-noise ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedChannel {
    pub name: String,
    pub lead_steps: usize,
    pub gain: f64,
    pub noise_sd: f64,
    #[serde(default)]
    pub missing_head: usize,
    #[serde(default)]
    pub missing_tail: usize,
}

/// Static attribute `loading * ln(base_rate) + N(0, noise_sd)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticSpec {
    pub name: String,
    pub loading: f64,
    pub noise_sd: f64,
}

/// Generator settings. Fields omitted from a config file take their
/// [`default_benchmark`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_districts: usize,
    pub counties_per_district: usize,
    pub months: usize,
    pub start: NaiveDate,
    pub state_code: String,
    /// Mean monthly events per county, district-major.
    pub base_rates: Vec<f64>,
    pub seasonal_amplitude: f64,
    pub trend_per_year: f64,
    /// Counties in a district share a random phase and differ by a whole
    /// number of months drawn from `0..=max_phase_offset`.
    pub max_phase_offset: usize,
    pub planted: Vec<PlantedChannel>,
    pub statics: Vec<StaticSpec>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn n_counties(&self) -> usize {
        self.n_districts * self.counties_per_district
    }

    pub fn county_code(&self, index: usize) -> String {
        format!("C{:02}", index + 1)
    }

    pub fn district_code(&self, index: usize) -> String {
        format!("D{}", index + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_districts == 0 || self.counties_per_district == 0 {
            return bad("need at least one district and one county per district".into());
        }
        if self.months < 36 {
            return bad(format!("months must be at least 36, got {}", self.months));
        }
        if self.base_rates.len() != self.n_counties() {
            return bad(format!("{} base rates for {} counties", self.base_rates.len(), self.n_counties()));
        }
        if self.base_rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("base rates must be positive".into());
        }
        if !(0.0..1.0).contains(&self.seasonal_amplitude) {
            return bad("seasonal_amplitude must lie in [0, 1)".into());
        }
        let max_lead = self.planted.iter().map(|p| p.lead_steps).max().unwrap_or(0);
        let horizon = (self.months + max_lead) as f64;
        if !self.trend_per_year.is_finite() || 1.0 + self.trend_per_year * horizon / 12.0 <= 0.0 {
            return bad("trend drives the intensity non-positive within the simulated span".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for p in &self.planted {
            if p.name.trim().is_empty() || !names.insert(p.name.as_str()) {
                return bad(format!("planted channel names must be unique and non-empty: `{}`", p.name));
            }
            if !(p.gain.is_finite() && p.noise_sd.is_finite() && p.noise_sd >= 0.0) {
                return bad(format!("channel `{}`: gain and noise_sd must be finite, noise_sd >= 0", p.name));
            }
            if p.missing_head + p.missing_tail >= self.months {
                return bad(format!("channel `{}` would be entirely missing", p.name));
            }
        }
        for s in &self.statics {
            if !(s.loading.is_finite() && s.noise_sd.is_finite() && s.noise_sd >= 0.0) {
                return bad(format!("static `{}`: loading and noise_sd must be finite, noise_sd >= 0", s.name));
            }
        }
        if self.state_code.trim().is_empty() {
            return bad("state_code must be non-empty".into());
        }
        Ok(())
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        default_benchmark()
    }
}

/// The pinned benchmark: 5 districts of 6 counties over 84 months with base
/// rates log-spaced across two orders of magnitude and two planted channels
/// leading by one and two months.
pub fn default_benchmark() -> SynthConfig {
    let n = 30;
    let (lo, hi): (f64, f64) = (0.3, 30.0);
    // Interleave so every district mixes sparse and dense counties.
    let base_rates = (0..n)
        .map(|i| {
            let district = i / 6;
            let slot = i % 6;
            let rank = slot * 5 + district;
            lo * (hi / lo).powf(rank as f64 / (n - 1) as f64)
        })
        .collect();
    SynthConfig {
        n_districts: 5,
        counties_per_district: 6,
        months: 84,
        start: NaiveDate::from_ymd_opt(2016, 1, 1).expect("valid date"),
        state_code: "ST".into(),
        base_rates,
        seasonal_amplitude: 0.6,
        trend_per_year: 0.0,
        max_phase_offset: 2,
        planted: vec![
            PlantedChannel {
                name: "dispensing".into(),
                lead_steps: 1,
                gain: 1.0,
                noise_sd: 0.1,
                missing_head: 6,
                missing_tail: 0,
            },
            PlantedChannel {
                name: "treatment".into(),
                lead_steps: 2,
                gain: 0.5,
                noise_sd: 0.2,
                missing_head: 0,
                missing_tail: 4,
            },
        ],
        statics: vec![
            StaticSpec { name: "unemployment".into(), loading: 0.8, noise_sd: 0.3 },
            StaticSpec { name: "vehicle_access".into(), loading: -0.2, noise_sd: 0.5 },
        ],
        seed: 20240611,
    }
}
