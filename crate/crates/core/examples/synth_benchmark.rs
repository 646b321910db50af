//! Generate the default synthetic benchmark and write it to a directory.
//!
//! cargo run --example synth_benchmark -- /tmp/benchmark

use panelcast::panel::{roll_up, aggregate_on};
use panelcast::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "benchmark".into());
    let cfg = SynthConfig::default();
    let synth = generate(&cfg)?;

    let panel = roll_up(&aggregate_on(&synth.events, &synth.hierarchy, synth.grid)?, &synth.hierarchy)?;
    println!(
        "{} events, {} counties in {} districts, {} series over {} months",
        synth.events.len(),
        synth.hierarchy.n_counties(),
        synth.hierarchy.n_districts(),
        panel.len(),
        synth.grid.len()
    );
    for county in synth.ledger.counties.iter().take(3) {
        let total: u64 = county.counts.iter().sum();
        println!("  {} ({}): base rate {:.2}, {} events", county.code, county.district, county.base_rate, total);
    }

    for path in synth.write_dir(out.as_ref())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
