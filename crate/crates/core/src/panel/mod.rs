//! Regions, time grids, and count panels: ingestion, aggregation,
//! normalization, roll-ups and sparsity analysis.

mod events;
mod grid;
mod region;
mod series;
mod sparsity;

pub use events::{aggregate, aggregate_on, ingest_events, roll_up, write_events, DateSpan, EventRecord};
pub use grid::{Interval, TimeGrid};
pub use region::{GeoHierarchy, Level, RegionId};
pub use series::SeriesPanel;
pub use sparsity::{sparsity, sparsity_report, SparsityCell, SparsityTable};
