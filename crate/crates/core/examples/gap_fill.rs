//! Holdout comparison of the three fill methods on the state-level
//! external channels, then fill a covariate set in place.

use panelcast::covariates::{roll_up_channels, LagSpec};
use panelcast::gapfill::{FillMethod, FillTable, SEASON};
use panelcast::pipeline::{CovariateChoice, Inputs};
use panelcast::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate(&SynthConfig::default())?;
    let state = synth.hierarchy.state().clone();

    let mut channels = Vec::new();
    for (name, per_county) in &synth.channels {
        let rolled = roll_up_channels(per_county, &synth.hierarchy)?;
        channels.push(rolled[&state].renamed(name));
    }
    print!("{}", FillTable::evaluate(&channels, 12, Some(SEASON))?.to_csv());

    // The All set fills gaps during assembly; every value is then finite.
    let inputs = Inputs::from_synth(&synth)?;
    let set = inputs.covariates(CovariateChoice::All, LagSpec::new(1, 5)?, FillMethod::ExpSmooth)?.expect("All has covariates");
    let synthetic = set.channels().map(|(_, c)| c.origin().iter().filter(|o| !**o).count()).sum::<usize>();
    println!("filled {synthetic} channel steps across {} regions", set.regions().count());
    Ok(())
}
