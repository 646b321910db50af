//! Forecasting toolkit for sparse hierarchical event-count panels.
//!
//! The pipeline runs from raw events to model comparison:
//!
//! * [`panel`]: aggregate events into county series, roll them up to
//!   districts and the state, normalize, and measure sparsity.
//! * [`covariates`]: calendar encodings, nearby/similar region trends,
//!   static attributes, external channels and missingness flags.
//! * [`gapfill`]: fill leading/trailing covariate gaps and score fill methods.
//! * [`models`]: lagged linear regression, N-Linear and a reduced temporal
//!   fusion transformer, trained as global multi-series forecasters.
//! * [`backtest`]: train/test split and expanding-window evaluation.
//! * [`stats`]: Friedman and Nemenyi tests over per-region RMSEs.
//! * [`synth`]: seeded synthetic panels with planted structure.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory, and the
//! `panelcast` binary wraps the whole pipeline behind config files.

pub mod backtest;
pub mod cli;
pub mod covariates;
pub mod error;
pub mod files;
pub mod gapfill;
pub mod models;
pub mod panel;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
