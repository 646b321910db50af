//! Split and expanding-window evaluation of N-Linear with and without
//! covariates.

use panelcast::backtest::{evaluate_expanding, evaluate_split, level_summary, ExpandingConfig};
use panelcast::covariates::LagSpec;
use panelcast::gapfill::FillMethod;
use panelcast::models::{ModelKind, ModelSpec, TrainConfig, WindowSpec};
use panelcast::pipeline::{CovariateChoice, Inputs};
use panelcast::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inputs = Inputs::from_synth(&generate(&SynthConfig::default())?)?;
    let spec = ModelSpec::new(ModelKind::NLinear, WindowSpec::default(), TrainConfig::default());

    for choice in [CovariateChoice::None, CovariateChoice::Common] {
        let data = inputs.dataset(choice, LagSpec::new(1, 5)?, FillMethod::ExpSmooth)?;
        let split = evaluate_split(&spec, &data)?;
        let expanding = evaluate_expanding(&spec, &data, ExpandingConfig::default())?;
        println!("covariates {choice}");
        println!("  split      {:?}", level_summary(&split.per_region_mean()));
        println!("  expanding  {:?}", level_summary(&expanding.last_year_mean(12)));
    }
    Ok(())
}
