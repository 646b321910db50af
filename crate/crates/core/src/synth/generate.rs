use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SynthConfig;
use crate::covariates::{write_dynamic_channel, write_static_table, Channel, StaticTable};
use crate::error::Result;
use crate::files::write_with;
use crate::panel::{write_events, EventRecord, GeoHierarchy, Interval, RegionId, TimeGrid};
use crate::rng::SplitMix64;

/// Latent state of one county.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyLatent {
    pub code: String,
    pub district: String,
    pub base_rate: f64,
    pub phase: f64,
    pub offset_months: usize,
    pub lambda: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Noise-free values and noise draws of one planted channel in one county.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelLatent {
    pub clean: Vec<f64>,
    pub noise: Vec<f64>,
}

/// Every latent quantity behind a generated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthLedger {
    pub config: SynthConfig,
    pub counties: Vec<CountyLatent>,
    pub channels: BTreeMap<String, BTreeMap<String, ChannelLatent>>,
    pub statics: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub grid: TimeGrid,
    pub hierarchy: GeoHierarchy,
    pub events: Vec<EventRecord>,
    pub channels: BTreeMap<String, BTreeMap<RegionId, Channel>>,
    pub statics: StaticTable,
    pub ledger: SynthLedger,
}

/// Intensity of a county with the given base rate and phase at step `t`.
pub fn intensity(cfg: &SynthConfig, base_rate: f64, phase: f64, t: usize) -> f64 {
    let t = t as f64;
    base_rate * (1.0 + cfg.seasonal_amplitude * (2.0 * PI * t / 12.0 + phase).sin()) * (1.0 + cfg.trend_per_year * t / 12.0)
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let grid = TimeGrid::new(Interval::Monthly, cfg.start, cfg.months)?;
    let mut root = SplitMix64::new(cfg.seed);
    let mut phase_rng = root.fork(1);
    let mut count_rng = root.fork(2);
    let mut day_rng = root.fork(3);
    let mut channel_rng = root.fork(4);
    let mut static_rng = root.fork(5);

    let mut counties = Vec::with_capacity(cfg.n_counties());
    for d in 0..cfg.n_districts {
        let shared = phase_rng.uniform(0.0, 2.0 * PI);
        for j in 0..cfg.counties_per_district {
            let i = d * cfg.counties_per_district + j;
            let offset_months = phase_rng.below(cfg.max_phase_offset + 1);
            let phase = shared + offset_months as f64 * 2.0 * PI / 12.0;
            let base_rate = cfg.base_rates[i];
            let lambda: Vec<f64> = (0..cfg.months).map(|t| intensity(cfg, base_rate, phase, t)).collect();
            counties.push(CountyLatent {
                code: cfg.county_code(i),
                district: cfg.district_code(d),
                base_rate,
                phase,
                offset_months,
                counts: Vec::new(),
                lambda,
            });
        }
    }
    for c in counties.iter_mut() {
        c.counts = c.lambda.iter().map(|&l| count_rng.poisson(l)).collect();
    }

    let hierarchy = GeoHierarchy::from_pairs(counties.iter().map(|c| (c.code.clone(), c.district.clone())), &cfg.state_code)?;

    let mut events = Vec::new();
    for c in &counties {
        let region = RegionId::county(c.code.clone())?;
        for (t, &n) in c.counts.iter().enumerate() {
            let first = grid.date_of(t);
            let days = (grid.date_of(t + 1) - first).num_days() as usize;
            let mut per_day = vec![0u32; days];
            for _ in 0..n {
                per_day[day_rng.below(days)] += 1;
            }
            for (day, &w) in per_day.iter().enumerate() {
                if w > 0 {
                    events.push(EventRecord::new(first + chrono::Days::new(day as u64), region.clone(), w)?);
                }
            }
        }
    }
    events.sort_by(|a, b| (a.date, &a.region).cmp(&(b.date, &b.region)));

    let mut channels = BTreeMap::new();
    let mut channel_ledger = BTreeMap::new();
    for p in &cfg.planted {
        let mut per_region = BTreeMap::new();
        let mut latent = BTreeMap::new();
        for c in &counties {
            let clean: Vec<f64> = (0..cfg.months).map(|t| p.gain * intensity(cfg, c.base_rate, c.phase, t + p.lead_steps)).collect();
            let sd = p.noise_sd * p.gain.abs() * c.base_rate;
            let noise: Vec<f64> = (0..cfg.months).map(|_| channel_rng.normal() * sd).collect();
            let values = (0..cfg.months)
                .map(|t| (t >= p.missing_head && t + p.missing_tail < cfg.months).then(|| clean[t] + noise[t]))
                .collect();
            per_region.insert(RegionId::county(c.code.clone())?, Channel::from_options(p.name.clone(), values));
            latent.insert(c.code.clone(), ChannelLatent { clean, noise });
        }
        channels.insert(p.name.clone(), per_region);
        channel_ledger.insert(p.name.clone(), latent);
    }

    let mut statics = StaticTable::new();
    let mut static_ledger: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for s in &cfg.statics {
        for c in &counties {
            let v = s.loading * c.base_rate.ln() + static_rng.normal() * s.noise_sd;
            statics.insert((RegionId::county(c.code.clone())?, s.name.clone()), v);
            static_ledger.entry(s.name.clone()).or_default().insert(c.code.clone(), v);
        }
    }

    let ledger = SynthLedger { config: cfg.clone(), counties, channels: channel_ledger, statics: static_ledger };
    Ok(SynthOutput { grid, hierarchy, events, channels, statics, ledger })
}

impl SynthOutput {
    /// Write `events.csv`, `hierarchy.csv`, `static.csv`,
    /// `channels/<name>.csv` and `ledger.json` under `dir`; returns the
    /// written paths.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let mut written = Vec::new();
        let events = dir.join("events.csv");
        write_with(&events, |b| write_events(&self.events, b))?;
        written.push(events);
        let hierarchy = dir.join("hierarchy.csv");
        write_with(&hierarchy, |b| self.hierarchy.write_csv(b))?;
        written.push(hierarchy);
        let statics = dir.join("static.csv");
        write_with(&statics, |b| write_static_table(&self.statics, b))?;
        written.push(statics);
        for (name, per_region) in &self.channels {
            let path = dir.join("channels").join(format!("{name}.csv"));
            write_with(&path, |b| write_dynamic_channel(per_region, &self.grid, b))?;
            written.push(path);
        }
        let ledger = dir.join("ledger.json");
        write_with(&ledger, |b| {
            serde_json::to_writer_pretty(&mut *b, &self.ledger)?;
            b.push(b'\n');
            Ok(())
        })?;
        written.push(ledger);
        Ok(written)
    }
}
