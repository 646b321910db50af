use nalgebra::DMatrix;

use super::params::{matvec_add, matvec_backward, Block, Params};
use super::window::{InputShape, SupervisedSample};
use crate::error::{Error, Result};

pub(crate) const RIDGE_LAMBDA: f64 = 1e-6;

/// Closed-form ridge regression of every horizon step on the unanchored
/// features plus an intercept.
///
/// The penalty is scaled by the number of samples so repeating the training
/// set leaves the fit unchanged.
pub(crate) fn lagged_blocks(shape: &InputShape) -> Vec<Block> {
    let d = shape.feature_len();
    vec![Block::new("coef", shape.horizon, d, d), Block::new("intercept", shape.horizon, 1, d)]
}

pub(crate) fn fit_lagged(samples: &[SupervisedSample], shape: &InputShape, lambda: f64) -> Result<Params> {
    let n = samples.len();
    let d = shape.feature_len();
    let p = d + 1;
    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut y = DMatrix::<f64>::zeros(n, shape.horizon);
    for (i, s) in samples.iter().enumerate() {
        if s.label.len() != shape.horizon {
            return Err(Error::invalid("training labels must span the full horizon"));
        }
        for (j, f) in s.features(0.0).into_iter().enumerate() {
            x[(i, j)] = f;
        }
        x[(i, d)] = 1.0;
        for (h, v) in s.label.iter().enumerate() {
            y[(i, h)] = *v;
        }
    }
    let mut gram = x.transpose() * &x;
    for j in 0..p {
        gram[(j, j)] += lambda * n as f64;
    }
    let rhs = x.transpose() * y;
    let beta = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::Training(format!("ridge solve failed: {e}")))?,
    };
    let mut params = Params::zeros(lagged_blocks(shape));
    let coef = params.range("coef");
    let icpt = params.range("intercept");
    let values = params.values_mut();
    for h in 0..shape.horizon {
        for j in 0..d {
            values[coef.start + h * d + j] = beta[(j, h)];
        }
        values[icpt.start + h] = beta[(d, h)];
    }
    Ok(params)
}

pub(crate) fn predict_affine(params: &Params, sample: &SupervisedSample, anchor: f64) -> Vec<f64> {
    let x = sample.features(anchor);
    let mut y = params.block("intercept").to_vec();
    matvec_add(params.block("coef"), &x, &mut y);
    y.iter_mut().for_each(|v| *v += anchor);
    y
}

pub(crate) fn nlinear_blocks(shape: &InputShape) -> Vec<Block> {
    let d = shape.feature_len();
    vec![Block::new("weight", shape.horizon, d, d), Block::new("bias", shape.horizon, 1, d)]
}

/// N-Linear: one affine map on the input with the last observed target
/// subtracted, added back to the output. Covariates are not anchored.
pub(crate) fn nlinear_predict(params: &Params, sample: &SupervisedSample) -> Vec<f64> {
    let anchor = sample.last_target();
    let x = sample.features(anchor);
    let mut y = params.block("bias").to_vec();
    matvec_add(params.block("weight"), &x, &mut y);
    y.iter_mut().for_each(|v| *v += anchor);
    y
}

/// Mean squared error over the batch and its gradient (accumulated into
/// `grad`).
pub(crate) fn nlinear_loss_grad(params: &Params, batch: &[&SupervisedSample], grad: &mut [f64]) -> f64 {
    let wr = params.range("weight");
    let br = params.range("bias");
    let w = params.block("weight");
    let horizon = br.len();
    let scale = 1.0 / (batch.len() * horizon) as f64;
    let mut loss = 0.0;
    for s in batch {
        let anchor = s.last_target();
        let x = s.features(anchor);
        let mut y = params.block("bias").to_vec();
        matvec_add(w, &x, &mut y);
        let dy: Vec<f64> = y
            .iter()
            .zip(&s.label)
            .map(|(p, t)| {
                let e = p + anchor - t;
                loss += e * e;
                2.0 * e * scale
            })
            .collect();
        matvec_backward(w, &x, &dy, &mut grad[wr.clone()], None);
        for (g, d) in grad[br.clone()].iter_mut().zip(&dy) {
            *g += d;
        }
    }
    loss * scale
}
