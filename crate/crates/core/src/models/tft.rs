//! Compact temporal fusion transformer.
//!
//! Per-variable scalar embeddings, a static context vector, a gated variable
//! selection network at every input step, two-head self-attention read out
//! at the last step with a gated skip, a position-wise gated residual block
//! and a linear horizon head. Gradients are written out by hand.

use std::ops::Range;

use super::params::{matvec_add, matvec_backward, Block, Params};
use super::window::{InputShape, SupervisedSample};

pub const HIDDEN: usize = 16;
pub const HEADS: usize = 2;

pub(crate) fn blocks(shape: &InputShape) -> Vec<Block> {
    let v = 1 + shape.n_covariates;
    let s = shape.n_static;
    let d = HIDDEN;
    vec![
        Block::new("embed_w", v, d, 1),
        Block::new("embed_b", v, d, 1),
        Block::new("static_w", d, s, s),
        Block::new("static_b", d, 1, s),
        Block::new("select_wx", d, v, v + d),
        Block::new("select_wc", d, d, v + d),
        Block::new("select_b", d, 1, v + d),
        Block::new("select_gw", 2 * v, d, d),
        Block::new("select_gb", 2 * v, 1, d),
        Block::new("attn_q", d, d, d),
        Block::new("attn_k", d, d, d),
        Block::new("attn_v", d, d, d),
        Block::new("attn_o", d, d, d),
        Block::new("attn_ob", d, 1, d),
        Block::new("skip_gw", d, d, d),
        Block::new("skip_gb", d, 1, d),
        Block::new("ff_w1", d, d, d),
        Block::new("ff_b1", d, 1, d),
        Block::new("ff_w2", 2 * d, d, d),
        Block::new("ff_b2", 2 * d, 1, d),
        Block::new("head_w", shape.horizon, d, d),
        Block::new("head_b", shape.horizon, 1, d),
    ]
}

struct Layout {
    embed_w: Range<usize>,
    embed_b: Range<usize>,
    static_w: Range<usize>,
    static_b: Range<usize>,
    select_wx: Range<usize>,
    select_wc: Range<usize>,
    select_b: Range<usize>,
    select_gw: Range<usize>,
    select_gb: Range<usize>,
    attn_q: Range<usize>,
    attn_k: Range<usize>,
    attn_v: Range<usize>,
    attn_o: Range<usize>,
    attn_ob: Range<usize>,
    skip_gw: Range<usize>,
    skip_gb: Range<usize>,
    ff_w1: Range<usize>,
    ff_b1: Range<usize>,
    ff_w2: Range<usize>,
    ff_b2: Range<usize>,
    head_w: Range<usize>,
    head_b: Range<usize>,
}

impl Layout {
    fn of(p: &Params) -> Self {
        Self {
            embed_w: p.range("embed_w"),
            embed_b: p.range("embed_b"),
            static_w: p.range("static_w"),
            static_b: p.range("static_b"),
            select_wx: p.range("select_wx"),
            select_wc: p.range("select_wc"),
            select_b: p.range("select_b"),
            select_gw: p.range("select_gw"),
            select_gb: p.range("select_gb"),
            attn_q: p.range("attn_q"),
            attn_k: p.range("attn_k"),
            attn_v: p.range("attn_v"),
            attn_o: p.range("attn_o"),
            attn_ob: p.range("attn_ob"),
            skip_gw: p.range("skip_gw"),
            skip_gb: p.range("skip_gb"),
            ff_w1: p.range("ff_w1"),
            ff_b1: p.range("ff_b1"),
            ff_w2: p.range("ff_w2"),
            ff_b2: p.range("ff_b2"),
            head_w: p.range("head_w"),
            head_b: p.range("head_b"),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

/// `dlogit = w * (dw - <w, dw>)`.
fn softmax_backward(w: &[f64], dw: &[f64]) -> Vec<f64> {
    let dot: f64 = w.iter().zip(dw).map(|(a, b)| a * b).sum();
    w.iter().zip(dw).map(|(a, b)| a * (b - dot)).collect()
}

fn inputs(sample: &SupervisedSample, t: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(1 + sample.covariate_windows.len());
    x.push(sample.target_window[t]);
    x.extend(sample.covariate_windows.iter().map(|c| c[t]));
    x
}

struct Step {
    x: Vec<f64>,
    /// Embeddings, variable-major (V x d).
    e: Vec<f64>,
    h_pre: Vec<f64>,
    h: Vec<f64>,
    g: Vec<f64>,
    w: Vec<f64>,
    z: Vec<f64>,
}

struct Cache {
    c: Vec<f64>,
    steps: Vec<Step>,
    q: Vec<f64>,
    k: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    /// Attention weights of the last-step query, per head.
    attn: Vec<Vec<f64>>,
    o: Vec<f64>,
    m: Vec<f64>,
    gate: Vec<f64>,
    a: Vec<f64>,
    r_pre: Vec<f64>,
    r: Vec<f64>,
    g2: Vec<f64>,
    p: Vec<f64>,
    y: Vec<f64>,
}

fn forward(pv: &[f64], lay: &Layout, sample: &SupervisedSample) -> Cache {
    let d = HIDDEN;
    let len = sample.input_len();
    let nv = 1 + sample.covariate_windows.len();

    let mut c = pv[lay.static_b.clone()].to_vec();
    matvec_add(&pv[lay.static_w.clone()], &sample.static_vec, &mut c);
    c.iter_mut().for_each(|v| *v = v.tanh());
    let mut cc = pv[lay.select_b.clone()].to_vec();
    matvec_add(&pv[lay.select_wc.clone()], &c, &mut cc);

    let ew = &pv[lay.embed_w.clone()];
    let eb = &pv[lay.embed_b.clone()];
    let mut steps = Vec::with_capacity(len);
    for t in 0..len {
        let x = inputs(sample, t);
        let mut e = vec![0.0; nv * d];
        for vi in 0..nv {
            for j in 0..d {
                e[vi * d + j] = ew[vi * d + j] * x[vi] + eb[vi * d + j];
            }
        }
        let mut h_pre = cc.clone();
        matvec_add(&pv[lay.select_wx.clone()], &x, &mut h_pre);
        let h: Vec<f64> = h_pre.iter().map(|&v| elu(v)).collect();
        let mut g = pv[lay.select_gb.clone()].to_vec();
        matvec_add(&pv[lay.select_gw.clone()], &h, &mut g);
        let logits: Vec<f64> = (0..nv).map(|vi| x[vi] + g[vi] * sigmoid(g[nv + vi])).collect();
        let w = softmax(&logits);
        let mut z = vec![0.0; d];
        for vi in 0..nv {
            for j in 0..d {
                z[j] += w[vi] * e[vi * d + j];
            }
        }
        steps.push(Step { x, e, h_pre, h, g, w, z });
    }

    let last = &steps[len - 1].z;
    let mut q = vec![0.0; d];
    matvec_add(&pv[lay.attn_q.clone()], last, &mut q);
    let mut k = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    for s in &steps {
        let mut kt = vec![0.0; d];
        matvec_add(&pv[lay.attn_k.clone()], &s.z, &mut kt);
        let mut vt = vec![0.0; d];
        matvec_add(&pv[lay.attn_v.clone()], &s.z, &mut vt);
        k.push(kt);
        v.push(vt);
    }
    let dh = d / HEADS;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut attn = Vec::with_capacity(HEADS);
    let mut o = vec![0.0; d];
    for head in 0..HEADS {
        let cols = head * dh..(head + 1) * dh;
        let scores: Vec<f64> = k
            .iter()
            .map(|kt| q[cols.clone()].iter().zip(&kt[cols.clone()]).map(|(a, b)| a * b).sum::<f64>() * scale)
            .collect();
        let a = softmax(&scores);
        for (s, vt) in v.iter().enumerate() {
            for j in cols.clone() {
                o[j] += a[s] * vt[j];
            }
        }
        attn.push(a);
    }
    let mut m = pv[lay.attn_ob.clone()].to_vec();
    matvec_add(&pv[lay.attn_o.clone()], &o, &mut m);
    let mut gate = pv[lay.skip_gb.clone()].to_vec();
    matvec_add(&pv[lay.skip_gw.clone()], &m, &mut gate);
    gate.iter_mut().for_each(|v| *v = sigmoid(*v));
    let a: Vec<f64> = (0..d).map(|j| last[j] + m[j] * gate[j]).collect();

    let mut r_pre = pv[lay.ff_b1.clone()].to_vec();
    matvec_add(&pv[lay.ff_w1.clone()], &a, &mut r_pre);
    let r: Vec<f64> = r_pre.iter().map(|&v| elu(v)).collect();
    let mut g2 = pv[lay.ff_b2.clone()].to_vec();
    matvec_add(&pv[lay.ff_w2.clone()], &r, &mut g2);
    let p: Vec<f64> = (0..d).map(|j| a[j] + g2[j] * sigmoid(g2[d + j])).collect();

    let mut y = pv[lay.head_b.clone()].to_vec();
    matvec_add(&pv[lay.head_w.clone()], &p, &mut y);

    Cache { c, steps, q, k, v, attn, o, m, gate, a, r_pre, r, g2, p, y }
}

fn backward(pv: &[f64], lay: &Layout, sample: &SupervisedSample, cache: &Cache, dy: &[f64], grad: &mut [f64]) {
    let d = HIDDEN;
    let len = sample.input_len();
    let nv = 1 + sample.covariate_windows.len();

    grad[lay.head_b.clone()].iter_mut().zip(dy).for_each(|(g, v)| *g += v);
    let mut dp = vec![0.0; d];
    matvec_backward(&pv[lay.head_w.clone()], &cache.p, dy, &mut grad[lay.head_w.clone()], Some(&mut dp));

    // p = a + g2[..d] * sigmoid(g2[d..])
    let mut da = dp.clone();
    let mut dg2 = vec![0.0; 2 * d];
    for j in 0..d {
        let s = sigmoid(cache.g2[d + j]);
        dg2[j] = dp[j] * s;
        dg2[d + j] = dp[j] * cache.g2[j] * s * (1.0 - s);
    }
    grad[lay.ff_b2.clone()].iter_mut().zip(&dg2).for_each(|(g, v)| *g += v);
    let mut dr = vec![0.0; d];
    matvec_backward(&pv[lay.ff_w2.clone()], &cache.r, &dg2, &mut grad[lay.ff_w2.clone()], Some(&mut dr));
    let dr_pre: Vec<f64> = dr.iter().zip(&cache.r_pre).map(|(g, x)| g * elu_grad(*x)).collect();
    grad[lay.ff_b1.clone()].iter_mut().zip(&dr_pre).for_each(|(g, v)| *g += v);
    matvec_backward(&pv[lay.ff_w1.clone()], &cache.a, &dr_pre, &mut grad[lay.ff_w1.clone()], Some(&mut da));

    // a = z_last + m * gate
    let mut dz: Vec<Vec<f64>> = vec![vec![0.0; d]; len];
    dz[len - 1].iter_mut().zip(&da).for_each(|(g, v)| *g += v);
    let mut dm: Vec<f64> = (0..d).map(|j| da[j] * cache.gate[j]).collect();
    let dgate_pre: Vec<f64> = (0..d)
        .map(|j| da[j] * cache.m[j] * cache.gate[j] * (1.0 - cache.gate[j]))
        .collect();
    grad[lay.skip_gb.clone()].iter_mut().zip(&dgate_pre).for_each(|(g, v)| *g += v);
    matvec_backward(&pv[lay.skip_gw.clone()], &cache.m, &dgate_pre, &mut grad[lay.skip_gw.clone()], Some(&mut dm));
    grad[lay.attn_ob.clone()].iter_mut().zip(&dm).for_each(|(g, v)| *g += v);
    let mut d_o = vec![0.0; d];
    matvec_backward(&pv[lay.attn_o.clone()], &cache.o, &dm, &mut grad[lay.attn_o.clone()], Some(&mut d_o));

    let dh = d / HEADS;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut dq = vec![0.0; d];
    let mut dk = vec![vec![0.0; d]; len];
    let mut dv = vec![vec![0.0; d]; len];
    for head in 0..HEADS {
        let cols = head * dh..(head + 1) * dh;
        let a = &cache.attn[head];
        let mut dw = vec![0.0; len];
        for s in 0..len {
            for j in cols.clone() {
                dv[s][j] += a[s] * d_o[j];
                dw[s] += d_o[j] * cache.v[s][j];
            }
        }
        let dscore = softmax_backward(a, &dw);
        for s in 0..len {
            let ds = dscore[s] * scale;
            for j in cols.clone() {
                dq[j] += ds * cache.k[s][j];
                dk[s][j] += ds * cache.q[j];
            }
        }
    }
    let last = &cache.steps[len - 1].z;
    matvec_backward(&pv[lay.attn_q.clone()], last, &dq, &mut grad[lay.attn_q.clone()], Some(&mut dz[len - 1]));
    for s in 0..len {
        let z = &cache.steps[s].z;
        matvec_backward(&pv[lay.attn_k.clone()], z, &dk[s], &mut grad[lay.attn_k.clone()], Some(&mut dz[s]));
        matvec_backward(&pv[lay.attn_v.clone()], z, &dv[s], &mut grad[lay.attn_v.clone()], Some(&mut dz[s]));
    }

    let mut dcc = vec![0.0; d];
    for (t, step) in cache.steps.iter().enumerate() {
        let dzt = &dz[t];
        let mut dw = vec![0.0; nv];
        for vi in 0..nv {
            let e = &step.e[vi * d..(vi + 1) * d];
            dw[vi] = e.iter().zip(dzt).map(|(a, b)| a * b).sum();
            for j in 0..d {
                let de = step.w[vi] * dzt[j];
                grad[lay.embed_w.start + vi * d + j] += de * step.x[vi];
                grad[lay.embed_b.start + vi * d + j] += de;
            }
        }
        let dlogit = softmax_backward(&step.w, &dw);
        let mut dg = vec![0.0; 2 * nv];
        for vi in 0..nv {
            let s = sigmoid(step.g[nv + vi]);
            dg[vi] = dlogit[vi] * s;
            dg[nv + vi] = dlogit[vi] * step.g[vi] * s * (1.0 - s);
        }
        grad[lay.select_gb.clone()].iter_mut().zip(&dg).for_each(|(g, v)| *g += v);
        let mut dhv = vec![0.0; d];
        matvec_backward(&pv[lay.select_gw.clone()], &step.h, &dg, &mut grad[lay.select_gw.clone()], Some(&mut dhv));
        let dh_pre: Vec<f64> = dhv.iter().zip(&step.h_pre).map(|(g, x)| g * elu_grad(*x)).collect();
        matvec_backward(&pv[lay.select_wx.clone()], &step.x, &dh_pre, &mut grad[lay.select_wx.clone()], None);
        dcc.iter_mut().zip(&dh_pre).for_each(|(g, v)| *g += v);
    }
    grad[lay.select_b.clone()].iter_mut().zip(&dcc).for_each(|(g, v)| *g += v);
    let mut dc = vec![0.0; d];
    matvec_backward(&pv[lay.select_wc.clone()], &cache.c, &dcc, &mut grad[lay.select_wc.clone()], Some(&mut dc));
    let dc_pre: Vec<f64> = dc.iter().zip(&cache.c).map(|(g, c)| g * (1.0 - c * c)).collect();
    grad[lay.static_b.clone()].iter_mut().zip(&dc_pre).for_each(|(g, v)| *g += v);
    matvec_backward(&pv[lay.static_w.clone()], &sample.static_vec, &dc_pre, &mut grad[lay.static_w.clone()], None);
}

pub(crate) fn predict(params: &Params, sample: &SupervisedSample) -> Vec<f64> {
    forward(params.values(), &Layout::of(params), sample).y
}

pub(crate) fn loss_grad(params: &Params, batch: &[&SupervisedSample], grad: &mut [f64]) -> f64 {
    let lay = Layout::of(params);
    let pv = params.values();
    let horizon = lay.head_b.len();
    let scale = 1.0 / (batch.len() * horizon) as f64;
    let mut loss = 0.0;
    for s in batch {
        let cache = forward(pv, &lay, s);
        let dy: Vec<f64> = cache
            .y
            .iter()
            .zip(&s.label)
            .map(|(p, t)| {
                let e = p - t;
                loss += e * e;
                2.0 * e * scale
            })
            .collect();
        backward(pv, &lay, s, &cache, &dy, grad);
    }
    loss * scale
}

/// Variable selection weights (input step x variable) and last-step
/// attention weights (head x input step) for one window.
pub(crate) fn interpret(params: &Params, sample: &SupervisedSample) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let cache = forward(params.values(), &Layout::of(params), sample);
    (cache.steps.into_iter().map(|s| s.w).collect(), cache.attn)
}
