//! Covariate construction: calendar encodings, nearby and similar region
//! trends, static attributes, external channels and missingness flags.

mod calendar;
mod channel;
mod set;
mod trends;

pub use calendar::{calendar_covariates, SEASONS};
pub use channel::{missing_flag, Channel, MISSING_FLAG_SUFFIX};
pub use set::{
    attach_static, ingest_dynamic_channel, read_static_table, roll_up_channels, write_dynamic_channel,
    write_static_table, CovariateSet, StaticTable,
};
pub use trends::{
    nearby_region_trend, pearson, rank_lagged_candidates, similar_region_trend, LagSpec, Selection, TrendChannel,
    NEARBY_TREND, SIMILAR_TREND,
};
