use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::linear;
use super::params::{Block, Params};
use super::tft;
use super::window::{InputShape, SupervisedSample, WindowSpec};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LaggedRegression,
    #[serde(rename = "nlinear")]
    NLinear,
    TftLite,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::LaggedRegression, ModelKind::NLinear, ModelKind::TftLite];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::LaggedRegression => "lagged_regression",
            ModelKind::NLinear => "nlinear",
            ModelKind::TftLite => "tft_lite",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 50, batch_size: 32, learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.eps <= 0.0 {
            return Err(Error::Config("adam betas must lie in [0, 1) and eps must be positive".into()));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.learning_rate, beta1: self.beta1, beta2: self.beta2, eps: self.eps }
    }
}

/// Anything that produces a horizon-length forecast for a window.
pub trait Forecaster {
    fn predict(&self, sample: &SupervisedSample) -> Result<Vec<f64>>;
}

/// Anything that can be fitted on pooled training windows.
pub trait Fitter {
    fn name(&self) -> String;
    fn window(&self) -> WindowSpec;
    fn fit(&self, samples: &[SupervisedSample]) -> Result<Box<dyn Forecaster>>;
}

/// A model kind together with its window and training settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub window: WindowSpec,
    pub train: TrainConfig,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, window: WindowSpec, train: TrainConfig) -> Self {
        Self { kind, window, train }
    }

    pub fn train(&self, samples: &[SupervisedSample]) -> Result<Trained> {
        train(self.kind, self.window, samples, &self.train)
    }
}

impl Fitter for ModelSpec {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn window(&self) -> WindowSpec {
        self.window
    }

    fn fit(&self, samples: &[SupervisedSample]) -> Result<Box<dyn Forecaster>> {
        Ok(Box::new(self.train(samples)?.model))
    }
}

/// Trained weights plus everything needed to rebuild the model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    kind: ModelKind,
    shape: InputShape,
    cfg: TrainConfig,
    params: Params,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: FittedModel,
    /// Full-data mean squared error after each epoch; empty for closed-form
    /// fits.
    pub loss_curve: Vec<f64>,
}

const MAGIC: &str = "PANELCAST-MODEL 1";

#[derive(Serialize, Deserialize)]
struct Header {
    kind: ModelKind,
    shape: InputShape,
    cfg: TrainConfig,
    blocks: Vec<Block>,
}

fn blocks_for(kind: ModelKind, shape: &InputShape) -> Vec<Block> {
    match kind {
        ModelKind::LaggedRegression => linear::lagged_blocks(shape),
        ModelKind::NLinear => linear::nlinear_blocks(shape),
        ModelKind::TftLite => tft::blocks(shape),
    }
}

impl FittedModel {
    /// Untrained model with seeded uniform initialization.
    pub fn init(kind: ModelKind, shape: InputShape, cfg: TrainConfig) -> Self {
        let mut rng = SplitMix64::new(cfg.seed).fork(1);
        let params = Params::uniform(blocks_for(kind, &shape), &mut rng);
        Self { kind, shape, cfg, params }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn shape(&self) -> &InputShape {
        &self.shape
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    /// Mean squared error over `batch` with its gradient accumulated into
    /// `grad`. Only defined for gradient-trained kinds.
    pub fn loss_grad(&self, batch: &[&SupervisedSample], grad: &mut [f64]) -> Result<f64> {
        match self.kind {
            ModelKind::NLinear => Ok(linear::nlinear_loss_grad(&self.params, batch, grad)),
            ModelKind::TftLite => Ok(tft::loss_grad(&self.params, batch, grad)),
            ModelKind::LaggedRegression => Err(Error::invalid("lagged regression is fitted in closed form")),
        }
    }

    /// Mean squared error over full-horizon samples.
    pub fn mse(&self, samples: &[SupervisedSample]) -> Result<f64> {
        let mut total = 0.0;
        let mut n = 0usize;
        for s in samples {
            let p = self.predict(s)?;
            for (a, b) in p.iter().zip(&s.label) {
                total += (a - b) * (a - b);
                n += 1;
            }
        }
        Ok(total / n.max(1) as f64)
    }

    /// Variable selection and attention weights; `None` for linear kinds.
    pub fn interpret(&self, sample: &SupervisedSample) -> Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        (self.kind == ModelKind::TftLite).then(|| tft::interpret(&self.params, sample))
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header { kind: self.kind, shape: self.shape, cfg: self.cfg, blocks: self.params.blocks().to_vec() };
        let io = |e| Error::io("<model>", e);
        writeln!(out, "{MAGIC}").map_err(io)?;
        serde_json::to_writer(&mut out, &header)?;
        writeln!(out).map_err(io)?;
        let mut body = Vec::with_capacity(self.params.len() * 8);
        for v in self.params.values() {
            body.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&body).map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn load<R: BufRead>(mut input: R) -> Result<Self> {
        let io = |e| Error::io("<model>", e);
        let mut line = String::new();
        input.read_line(&mut line).map_err(io)?;
        if line.trim_end() != MAGIC {
            return Err(Error::invalid("not a model file"));
        }
        line.clear();
        input.read_line(&mut line).map_err(io)?;
        let header: Header = serde_json::from_str(line.trim_end())?;
        if header.blocks != blocks_for(header.kind, &header.shape) {
            return Err(Error::invalid("model header layout does not match its kind"));
        }
        let mut body = Vec::new();
        input.read_to_end(&mut body).map_err(io)?;
        if body.len() % 8 != 0 {
            return Err(Error::invalid("truncated model body"));
        }
        let values: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let params = Params::from_values(header.blocks, values)
            .ok_or_else(|| Error::invalid("model body length does not match its header"))?;
        Ok(Self { kind: header.kind, shape: header.shape, cfg: header.cfg, params })
    }
}

impl Forecaster for FittedModel {
    fn predict(&self, sample: &SupervisedSample) -> Result<Vec<f64>> {
        self.shape.check(sample)?;
        Ok(match self.kind {
            ModelKind::LaggedRegression => linear::predict_affine(&self.params, sample, 0.0),
            ModelKind::NLinear => linear::nlinear_predict(&self.params, sample),
            ModelKind::TftLite => tft::predict(&self.params, sample),
        })
    }
}

/// Fit `kind` on pooled windows.
///
/// Gradient-trained kinds run mini-batch Adam over a seeded shuffle each
/// epoch; a non-finite batch loss aborts with [`Error::Training`].
pub fn train(kind: ModelKind, window: WindowSpec, samples: &[SupervisedSample], cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    let first = samples.first().ok_or_else(|| Error::invalid("no training samples"))?;
    let shape = InputShape::of(first, window.horizon);
    if shape.input_len != window.input_len {
        return Err(Error::invalid("sample windows do not match the window spec"));
    }
    for s in samples {
        shape.check(s)?;
        if s.label.len() != window.horizon {
            return Err(Error::invalid("training labels must span the full horizon"));
        }
    }
    if kind == ModelKind::LaggedRegression {
        let params = linear::fit_lagged(samples, &shape, linear::RIDGE_LAMBDA)?;
        return Ok(Trained { model: FittedModel { kind, shape, cfg: *cfg, params }, loss_curve: Vec::new() });
    }

    let mut root = SplitMix64::new(cfg.seed);
    let mut model = FittedModel::init(kind, shape, *cfg);
    let mut shuffler = root.fork(2);
    let mut opt = Adam::new(cfg.adam(), model.params.len());
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut grad = vec![0.0; model.params.len()];
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        shuffler.shuffle(&mut order);
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&SupervisedSample> = chunk.iter().map(|&i| &samples[i]).collect();
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = model.loss_grad(&batch, &mut grad)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Training(format!("non-finite loss at epoch {epoch}, batch {b}")));
            }
            opt.step(model.params.values_mut(), &grad);
        }
        let mse = model.mse(samples)?;
        if !mse.is_finite() {
            return Err(Error::Training(format!("non-finite loss after epoch {epoch}")));
        }
        log::debug!("{kind} epoch {epoch}: mse {mse:.6}");
        loss_curve.push(mse);
    }
    Ok(Trained { model, loss_curve })
}

/// Worst relative disagreement between analytic and central-difference
/// gradients over every parameter, and whether all of them pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub checked: usize,
    pub failures: usize,
    pub worst_relative: f64,
}

/// Compare analytic gradients with central differences at step `h`.
///
/// A coordinate passes when the two agree to within `rel_tol` relative to
/// the larger magnitude, or to within `abs_tol` absolutely.
pub fn gradient_check(
    model: &FittedModel,
    batch: &[&SupervisedSample],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<GradCheck> {
    let mut analytic = vec![0.0; model.params.len()];
    model.loss_grad(batch, &mut analytic)?;
    let mut probe = model.clone();
    let mut scratch = vec![0.0; model.params.len()];
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..analytic.len() {
        let base = model.params.values()[i];
        probe.params.values_mut()[i] = base + h;
        let up = probe.loss_grad(batch, &mut scratch)?;
        probe.params.values_mut()[i] = base - h;
        let down = probe.loss_grad(batch, &mut scratch)?;
        probe.params.values_mut()[i] = base;
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let diff = (a - numeric).abs();
        let scale = a.abs().max(numeric.abs());
        if diff >= abs_tol {
            worst = worst.max(diff / scale);
        }
        if diff > rel_tol * scale && diff >= abs_tol {
            failures += 1;
        }
    }
    Ok(GradCheck { checked: analytic.len(), failures, worst_relative: worst })
}
