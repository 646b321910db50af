use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::backtest::{evaluate_expanding, evaluate_split, level_summary, BacktestReport};
use crate::covariates::{ingest_dynamic_channel, read_static_table, roll_up_channels, Channel, StaticTable};
use crate::error::{Error, Result};
use crate::files::{open, read_to_string, write_atomic, write_with};
use crate::gapfill::{FillTable, SEASON};
use crate::models::{Dataset, ModelSpec};
use crate::panel::{ingest_events, sparsity_report, DateSpan, GeoHierarchy, Interval, Level, SparsityTable, TimeGrid};
use crate::pipeline::Inputs;
use crate::stats::{ComparisonReport, ScoreMatrix};
use crate::synth::{generate, SynthConfig};

use super::config::{CompareScore, DataPaths, Regime, RunConfig};
use super::plot::backtest_svg;

fn steps_per_year(interval: Interval) -> usize {
    match interval {
        Interval::Weekly => 52,
        Interval::Monthly => 12,
        Interval::Quarterly => 4,
        Interval::Yearly => 1,
    }
}

fn span(data: &DataPaths, events: &[crate::panel::EventRecord]) -> Result<DateSpan> {
    let observed = DateSpan::of_events(events);
    let first = data.first.or(observed.map(|s| s.first));
    let last = data.last.or(observed.map(|s| s.last));
    match (first, last) {
        (Some(first), Some(last)) => DateSpan::new(first, last),
        _ => Err(Error::Config("no events and no explicit data.first/data.last".into())),
    }
}

/// Read events, hierarchy, channels and statics named by the `[data]` section.
pub(crate) fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let data = cfg.data()?;
    let events = ingest_events(open(&cfg.resolve(&data.events))?)?;
    let hierarchy = GeoHierarchy::read_csv(open(&cfg.resolve(&data.hierarchy))?, &data.state)?;
    let span = span(data, &events)?;
    let grid = TimeGrid::covering(data.interval, span.first, span.last)?;

    let mut channels = BTreeMap::new();
    for path in &data.channels {
        let path = cfg.resolve(path);
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Config(format!("cannot name channel from {}", path.display())))?
            .to_string();
        channels.insert(name.clone(), ingest_dynamic_channel(open(&path)?, &name, &grid)?);
    }
    let statics: StaticTable = match &data.r#static {
        Some(path) => read_static_table(open(&cfg.resolve(path))?)?,
        None => StaticTable::new(),
    };
    Inputs::new(&events, hierarchy, grid, channels, statics)
}

/// Generate the benchmark and write it plus a ready-to-run `run.toml`.
pub fn synth(cfg: &SynthConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let output = generate(cfg)?;
    let mut written = output.write_dir(out)?;
    let run = RunConfig {
        data: Some(DataPaths {
            events: "events.csv".into(),
            hierarchy: "hierarchy.csv".into(),
            state: cfg.state_code.clone(),
            r#static: Some("static.csv".into()),
            channels: output.channels.keys().map(|n| PathBuf::from("channels").join(format!("{n}.csv"))).collect(),
            interval: Interval::Monthly,
            first: Some(output.grid.start()),
            last: Some(output.grid.end_date()),
        }),
        ..RunConfig::default()
    };
    let text = toml::to_string(&run).map_err(|e| Error::Config(e.to_string()))?;
    let path = out.join("run.toml");
    write_atomic(&path, text.as_bytes())?;
    written.push(path);
    Ok(written)
}

/// Raw and normalized panels at every level.
pub fn ingest(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let inputs = load_inputs(cfg)?;
    let raw = out.join("panel.csv");
    write_with(&raw, |b| inputs.counts.write_csv(b))?;
    let normalized = out.join("panel_normalized.csv");
    let panel = inputs.normalized()?;
    write_with(&normalized, |b| panel.write_csv(b))?;
    Ok(vec![raw, normalized])
}

pub fn sparsity(cfg: &RunConfig, out: &Path) -> Result<SparsityTable> {
    let data = cfg.data()?;
    let events = ingest_events(open(&cfg.resolve(&data.events))?)?;
    let hierarchy = GeoHierarchy::read_csv(open(&cfg.resolve(&data.hierarchy))?, &data.state)?;
    let table = sparsity_report(&events, &hierarchy, span(data, &events)?, &Interval::ALL)?;
    write_atomic(&out.join("sparsity.csv"), table.to_csv().as_bytes())?;
    Ok(table)
}

/// Score the fill methods on the state-level roll-up of each external channel.
pub fn fill_eval(cfg: &RunConfig, out: &Path) -> Result<FillTable> {
    let inputs = load_inputs(cfg)?;
    if inputs.channels.is_empty() {
        return Err(Error::Config("fill-eval needs at least one external channel in [data] channels".into()));
    }
    let state = inputs.hierarchy.state().clone();
    let mut series: Vec<Channel> = Vec::new();
    for (name, per_county) in &inputs.channels {
        let rolled = roll_up_channels(per_county, &inputs.hierarchy)?;
        let channel = rolled.get(&state).ok_or_else(|| Error::channel(name, "no state-level roll-up"))?;
        series.push(channel.renamed(name));
    }
    let period = (inputs.grid().interval() == Interval::Monthly).then_some(SEASON);
    let table = FillTable::evaluate(&series, cfg.fill_eval.holdout, period)?;
    write_atomic(&out.join("fill_eval.csv"), table.to_csv().as_bytes())?;
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct BacktestArtifacts {
    pub reports: Vec<(PathBuf, BacktestReport)>,
    /// Contents of `summary.csv`.
    pub summary: String,
}

/// Every configured model x covariate set x regime. Reports land in
/// `reports/<model>__<covariates>__<regime>.json`; `summary.csv` holds
/// per-level mean RMSE (last year of origins for expanding runs).
pub fn backtest(cfg: &RunConfig, out: &Path, plot: bool) -> Result<BacktestArtifacts> {
    let inputs = load_inputs(cfg)?;
    let per_year = steps_per_year(inputs.grid().interval());
    let lag = cfg.covariates.lag()?;
    let mut summary = String::from("model,covariates,regime,score,county,district,state\n");
    let mut reports = Vec::new();
    for &choice in &cfg.covariates.sets {
        let data = inputs.dataset(choice, lag, cfg.covariates.fill)?;
        for &kind in &cfg.backtest.models {
            let spec = ModelSpec::new(kind, cfg.window, cfg.train);
            for &regime in &cfg.backtest.regimes {
                log::info!("backtest {}/{} ({})", kind.name(), choice.name(), regime.name());
                let mut report = match regime {
                    Regime::Split => evaluate_split(&spec, &data)?,
                    Regime::Expanding => evaluate_expanding(&spec, &data, cfg.expanding)?,
                };
                report.covariates = choice.name().to_string();
                let stem = format!("{}__{}__{}", kind.name(), choice.name(), regime.name());
                let path = out.join("reports").join(format!("{stem}.json"));
                write_atomic(&path, report.to_json()?.as_bytes())?;

                let (score, per_region) = match regime {
                    Regime::Split => ("test_windows", report.per_region_mean()),
                    Regime::Expanding => ("last_year", report.last_year_mean(per_year)),
                };
                let levels = level_summary(&per_region);
                write!(summary, "{},{},{},{score}", kind.name(), choice.name(), regime.name()).unwrap();
                for level in [Level::County, Level::District, Level::State] {
                    match levels.get(&level) {
                        Some(v) => write!(summary, ",{v:.4}").unwrap(),
                        None => summary.push(','),
                    }
                }
                summary.push('\n');

                if plot && regime == Regime::Expanding {
                    let svg = plot_report(&report, &data)?;
                    let stem = format!("{}__{}", kind.name(), choice.name());
                    write_atomic(&out.join("plots").join(format!("{stem}.svg")), svg.as_bytes())?;
                }
                reports.push((path, report));
            }
        }
    }
    write_atomic(&out.join("summary.csv"), summary.as_bytes())?;
    Ok(BacktestArtifacts { reports, summary })
}

fn plot_report(report: &BacktestReport, data: &Dataset) -> Result<String> {
    let state_idx = data
        .regions()
        .iter()
        .position(|r| r.level() == Level::State)
        .ok_or_else(|| Error::invalid("dataset has no state series"))?;
    let state = &data.regions()[state_idx];
    let actual: Vec<(f64, f64)> = data.target(state_idx).iter().enumerate().map(|(t, v)| (t as f64, *v)).collect();

    // Later origins overwrite overlapping steps of earlier windows.
    let mut stitched: BTreeMap<usize, f64> = BTreeMap::new();
    let mut per_origin: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in &report.records {
        let e = per_origin.entry(r.origin).or_default();
        e.0 += r.rmse;
        e.1 += 1;
        if &r.region == state {
            for (i, v) in r.predicted.iter().enumerate() {
                stitched.insert(r.origin + i, *v);
            }
        }
    }
    let predicted: Vec<(f64, f64)> = stitched.into_iter().map(|(t, v)| (t as f64, v)).collect();
    let rmse: Vec<(f64, f64)> = per_origin.into_iter().map(|(o, (s, n))| (o as f64, s / n as f64)).collect();
    Ok(backtest_svg(&report.label(), &actual, &predicted, &rmse))
}

/// Friedman + Nemenyi per geographic level over the configured reports.
/// Levels with fewer than two regions are skipped.
pub fn compare(cfg: &RunConfig, out: &Path) -> Result<ComparisonReport> {
    if cfg.compare.reports.len() < 2 {
        return Err(Error::Config("compare needs at least two reports".into()));
    }
    let per_year = steps_per_year(cfg.data.as_ref().map_or(Interval::Monthly, |d| d.interval));
    let mut labels = Vec::new();
    let mut scores: Vec<BTreeMap<crate::panel::RegionId, f64>> = Vec::new();
    for entry in &cfg.compare.reports {
        let path = cfg.resolve(&entry.path);
        let report = BacktestReport::from_json(&read_to_string(&path)?)?;
        labels.push(if entry.label.is_empty() { report.label() } else { entry.label.clone() });
        scores.push(match cfg.compare.score {
            CompareScore::AllWindows => report.per_region_mean(),
            CompareScore::LastYear => report.last_year_mean(per_year),
        });
    }
    let regions: BTreeSet<_> = scores[0].keys().cloned().collect();
    for (label, s) in labels.iter().zip(&scores).skip(1) {
        let other: BTreeSet<_> = s.keys().cloned().collect();
        if other != regions {
            let diff: Vec<String> = regions.symmetric_difference(&other).map(|r| r.to_string()).collect();
            return Err(Error::Config(format!(
                "report `{label}` covers different regions from `{}`: {}",
                labels[0],
                diff.join(", ")
            )));
        }
    }

    let mut matrices = Vec::new();
    for level in [Level::County, Level::District, Level::State] {
        let at_level: Vec<_> = regions.iter().filter(|r| r.level() == level).collect();
        if at_level.len() < 2 {
            log::info!("skipping {} level: {} region(s)", level.name(), at_level.len());
            continue;
        }
        let rows = at_level.iter().map(|r| scores.iter().map(|s| s[*r]).collect()).collect();
        matrices.push((level.name().to_string(), ScoreMatrix::new(labels.clone(), rows)?));
    }
    let report = ComparisonReport::build(matrices)?;
    write_atomic(&out.join("comparison.txt"), report.to_text().as_bytes())?;
    write_atomic(&out.join("comparison.csv"), report.to_csv().as_bytes())?;
    let json = serde_json::to_string_pretty(&report)?;
    write_atomic(&out.join("comparison.json"), json.as_bytes())?;
    Ok(report)
}
