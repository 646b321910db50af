//! Zero proportions of the benchmark at every level and interval.

use panelcast::panel::{sparsity_report, DateSpan, Interval};
use panelcast::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate(&SynthConfig::default())?;
    let span = DateSpan::new(synth.grid.start(), synth.grid.end_date())?;
    let table = sparsity_report(&synth.events, &synth.hierarchy, span, &Interval::ALL)?;
    print!("{}", table.to_csv());
    Ok(())
}
