//! Global multi-series forecasters.
//!
//! All models consume [`SupervisedSample`] windows pooled across regions and
//! emit horizon-length forecasts in normalized units.

mod adam;
mod fit;
mod linear;
mod params;
mod tft;
mod window;

pub use adam::{Adam, AdamConfig};
pub use fit::{gradient_check, train, FittedModel, Fitter, Forecaster, GradCheck, ModelKind, ModelSpec, TrainConfig, Trained};
pub use params::{Block, Params};
pub use tft::{HEADS, HIDDEN};
pub use window::{make_supervised, Dataset, InputShape, SupervisedSample, WindowSpec};
