use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;

/// Named matrix block inside a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Fan-in used for initialization.
    pub fan_in: usize,
}

impl Block {
    pub fn new(name: &str, rows: usize, cols: usize, fan_in: usize) -> Self {
        Self { name: name.into(), rows, cols, fan_in }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat parameter vector with a declared block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl Params {
    pub fn zeros(blocks: Vec<Block>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut total = 0;
        for b in &blocks {
            offsets.push(total);
            total += b.len();
        }
        Self { blocks, offsets, values: vec![0.0; total] }
    }

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per block, in declared order.
    pub fn uniform(blocks: Vec<Block>, rng: &mut SplitMix64) -> Self {
        let mut p = Self::zeros(blocks);
        for (b, &off) in p.blocks.iter().zip(&p.offsets) {
            let bound = 1.0 / (b.fan_in.max(1) as f64).sqrt();
            for v in &mut p.values[off..off + b.len()] {
                *v = rng.uniform(-bound, bound);
            }
        }
        p
    }

    pub fn from_values(blocks: Vec<Block>, values: Vec<f64>) -> Option<Self> {
        let mut p = Self::zeros(blocks);
        if p.values.len() != values.len() {
            return None;
        }
        p.values = values;
        Some(p)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn range(&self, name: &str) -> Range<usize> {
        let i = self
            .blocks
            .iter()
            .position(|b| b.name == name)
            .unwrap_or_else(|| panic!("no parameter block `{name}`"));
        self.offsets[i]..self.offsets[i] + self.blocks[i].len()
    }

    pub fn block(&self, name: &str) -> &[f64] {
        &self.values[self.range(name)]
    }
}

/// `out = W x (+ out)` for row-major `W` of shape (out.len(), x.len()).
#[inline]
pub(crate) fn matvec_add(w: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (o, row) in out.iter_mut().zip(w.chunks_exact(cols.max(1))) {
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Backward of `y = W x`: `dW += dy x^T`, `dx += W^T dy`.
#[inline]
pub(crate) fn matvec_backward(w: &[f64], x: &[f64], dy: &[f64], dw: &mut [f64], dx: Option<&mut [f64]>) {
    let cols = x.len();
    if cols == 0 {
        return;
    }
    for (r, g) in dy.iter().enumerate() {
        if *g == 0.0 {
            continue;
        }
        for (d, xv) in dw[r * cols..(r + 1) * cols].iter_mut().zip(x) {
            *d += g * xv;
        }
    }
    if let Some(dx) = dx {
        for (r, g) in dy.iter().enumerate() {
            for (d, wv) in dx.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
                *d += g * wv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_init_bounds() {
        let blocks = vec![Block::new("w", 3, 4, 4), Block::new("b", 3, 1, 4)];
        let mut rng = SplitMix64::new(1);
        let p = Params::uniform(blocks, &mut rng);
        assert_eq!(p.len(), 15);
        assert_eq!(p.range("b"), 12..15);
        assert!(p.values().iter().all(|v| v.abs() <= 0.5));
    }

    #[test]
    fn matvec_backward_matches_definition() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x = [1.0, -1.0, 2.0];
        let mut y = [0.0; 2];
        matvec_add(&w, &x, &mut y);
        assert_eq!(y, [5.0, 11.0]);
        let mut dw = [0.0; 6];
        let mut dx = [0.0; 3];
        matvec_backward(&w, &x, &[1.0, 2.0], &mut dw, Some(&mut dx));
        assert_eq!(dw, [1.0, -1.0, 2.0, 2.0, -2.0, 4.0]);
        assert_eq!(dx, [9.0, 12.0, 15.0]);
    }
}
