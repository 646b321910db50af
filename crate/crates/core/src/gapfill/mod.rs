//! Filling leading and trailing covariate gaps, and holdout evaluation of
//! the fill methods.

mod constant;
mod evaluate;
mod iterative;
mod smoothing;

pub use constant::{fill_constant, YEAR_STEPS};
pub use evaluate::{evaluate_fill, fill_channels, fill_covariates, FillMethod, FillTable};
pub use iterative::{fill_iterative, ImputationModel, IterativeImputer};
pub use smoothing::{fill_expsmooth, fit_expsmooth, SmootherFit, MIN_OBSERVED, SEASON};
