//! Build the three covariate sets and show what the similar-region search
//! picked for one county.

use panelcast::covariates::LagSpec;
use panelcast::gapfill::FillMethod;
use panelcast::pipeline::{CovariateChoice, Inputs};
use panelcast::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inputs = Inputs::from_synth(&generate(&SynthConfig::default())?)?;
    let lag = LagSpec::new(1, 5)?;

    for choice in CovariateChoice::ALL {
        let data = inputs.dataset(choice, lag, FillMethod::ExpSmooth)?;
        println!("{choice:>6}: channels {:?}, statics {:?}", data.channel_names(), data.static_names());
    }

    let (_, selection) = inputs.covariates_with_selection(CovariateChoice::Common, lag, FillMethod::ExpSmooth)?;
    if let Some((county, picks)) = selection.as_ref().and_then(|s| s.iter().next()) {
        println!("similar regions for {county}:");
        for (region, r) in picks {
            println!("  {region}  r = {r:+.3}");
        }
    }
    Ok(())
}
