//! Train each global model on pooled windows, save and reload one, and
//! read the TFT-lite interpretation weights.

use panelcast::covariates::LagSpec;
use panelcast::gapfill::FillMethod;
use panelcast::models::{train, FittedModel, ModelKind, TrainConfig, WindowSpec};
use panelcast::pipeline::{CovariateChoice, Inputs};
use panelcast::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inputs = Inputs::from_synth(&generate(&SynthConfig::default())?)?;
    let data = inputs.dataset(CovariateChoice::Common, LagSpec::new(1, 5)?, FillMethod::ExpSmooth)?;
    let window = WindowSpec::default();
    let samples = data.training_samples(window, 72)?;
    let cfg = TrainConfig { epochs: 20, ..TrainConfig::default() };
    println!("{} training windows", samples.len());

    for kind in ModelKind::ALL {
        let trained = train(kind, window, &samples, &cfg)?;
        match (trained.loss_curve.first(), trained.loss_curve.last()) {
            (Some(a), Some(b)) => println!("{kind:>17}: mse {a:.5} -> {b:.5}"),
            _ => println!("{kind:>17}: closed form, mse {:.5}", trained.model.mse(&samples)?),
        }

        if kind == ModelKind::TftLite {
            let mut bytes = Vec::new();
            trained.model.save(&mut bytes)?;
            let reloaded = FittedModel::load(bytes.as_slice())?;
            assert_eq!(reloaded, trained.model);

            let (selection, attention) = reloaded.interpret(&samples[0]).expect("tft has weights");
            let last = selection.last().expect("one row per step");
            println!("  variable selection at the last step: {last:.3?}");
            println!("  head 0 attention over the window: {:.3?}", attention[0]);
        }
    }
    Ok(())
}
