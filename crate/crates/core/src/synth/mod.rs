//! Seeded synthetic event panels with planted lead/lag structure.
//!
//! County intensities combine a base rate, a yearly sinusoid and a linear
//! trend; monthly counts are Poisson draws spread over the days of the
//! month. Planted channels track a county's future intensity, so their
//! relationship to the target is known exactly and recorded in the ledger.

mod config;
mod generate;

pub use config::{default_benchmark, PlantedChannel, StaticSpec, SynthConfig};
pub use generate::{generate, intensity, SynthLedger, SynthOutput, CountyLatent};

#[cfg(test)]
mod tests;
