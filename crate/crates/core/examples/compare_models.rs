//! Friedman and Nemenyi comparison of four configurations, one block per
//! geographic level.

use panelcast::backtest::evaluate_split;
use panelcast::covariates::LagSpec;
use panelcast::gapfill::FillMethod;
use panelcast::models::{ModelKind, ModelSpec, TrainConfig, WindowSpec};
use panelcast::panel::Level;
use panelcast::pipeline::{CovariateChoice, Inputs};
use panelcast::stats::{ComparisonReport, ScoreMatrix};
use panelcast::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inputs = Inputs::from_synth(&generate(&SynthConfig::default())?)?;
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for choice in [CovariateChoice::None, CovariateChoice::Common] {
        let data = inputs.dataset(choice, LagSpec::new(1, 5)?, FillMethod::ExpSmooth)?;
        for kind in [ModelKind::LaggedRegression, ModelKind::NLinear] {
            let spec = ModelSpec::new(kind, WindowSpec::default(), TrainConfig::default());
            labels.push(format!("{kind}/{choice}"));
            scores.push(evaluate_split(&spec, &data)?.per_region_mean());
        }
    }

    let mut matrices = Vec::new();
    for level in [Level::County, Level::District] {
        let rows = scores[0]
            .keys()
            .filter(|r| r.level() == level)
            .map(|r| scores.iter().map(|s| s[r]).collect())
            .collect();
        matrices.push((level.name().to_string(), ScoreMatrix::new(labels.clone(), rows)?));
    }
    print!("{}", ComparisonReport::build(matrices)?.to_text());
    Ok(())
}
