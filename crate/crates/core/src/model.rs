//! Desk-scale differentiable models with manual gradients.
//!
//! All prunable layers are stored as `Tensor4`: conv layers natively, dense
//! layers as degenerate tensors with `kh = kw = 1` so the same channel
//! grouping, prox, and pruning machinery applies everywhere. Weights are
//! f32; activations and gradient accumulation run in f64.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, RegressionData};
use crate::error::{Error, Result};
use crate::exec;
use crate::tensor::{Dims, LayerSet, Tensor4};

pub const CONV_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    /// Single dense readout `dim -> n_classes`.
    Softmax { dim: usize, n_classes: usize },
    /// Dense-ReLU-dense.
    Mlp { dim: usize, hidden: usize, n_classes: usize },
    /// conv 3x3 (1 -> c1), ReLU, 2x2 avg pool, conv 3x3 (c1 -> c2), ReLU,
    /// flatten, dense readout. Input is a single-channel side x side image.
    Cnn { side: usize, c1: usize, c2: usize, n_classes: usize },
}

impl Arch {
    pub fn input_dim(&self) -> usize {
        match *self {
            Arch::Softmax { dim, .. } => dim,
            Arch::Mlp { dim, .. } => dim,
            Arch::Cnn { side, .. } => side * side,
        }
    }

    pub fn n_classes(&self) -> usize {
        match *self {
            Arch::Softmax { n_classes, .. }
            | Arch::Mlp { n_classes, .. }
            | Arch::Cnn { n_classes, .. } => n_classes,
        }
    }

    /// Spatial side lengths through the CNN: (after conv1, after pool, after conv2).
    pub fn cnn_spatial(side: usize) -> Result<(usize, usize, usize)> {
        if side < CONV_K {
            return Err(Error::InvalidParam(format!("side {side} too small")));
        }
        let s1 = side - CONV_K + 1;
        if s1 % 2 != 0 {
            return Err(Error::InvalidParam(format!(
                "side {side} leaves odd {s1}x{s1} map before 2x2 pooling"
            )));
        }
        let sp = s1 / 2;
        if sp < CONV_K {
            return Err(Error::InvalidParam(format!(
                "pooled map {sp}x{sp} smaller than the 3x3 kernel"
            )));
        }
        Ok((s1, sp, sp - CONV_K + 1))
    }

    pub fn layer_dims(&self) -> Result<Vec<(String, Dims)>> {
        Ok(match *self {
            Arch::Softmax { dim, n_classes } => {
                vec![("fc".into(), Dims::new(dim, n_classes, 1, 1))]
            }
            Arch::Mlp { dim, hidden, n_classes } => vec![
                ("fc1".into(), Dims::new(dim, hidden, 1, 1)),
                ("fc2".into(), Dims::new(hidden, n_classes, 1, 1)),
            ],
            Arch::Cnn { side, c1, c2, n_classes } => {
                let (_, _, s2) = Arch::cnn_spatial(side)?;
                vec![
                    ("conv1".into(), Dims::new(1, c1, CONV_K, CONV_K)),
                    ("conv2".into(), Dims::new(c1, c2, CONV_K, CONV_K)),
                    ("fc".into(), Dims::new(c2 * s2 * s2, n_classes, 1, 1)),
                ]
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TinyModel {
    pub arch: Arch,
    pub params: LayerSet,
}

impl TinyModel {
    pub fn zeros(arch: Arch) -> Result<Self> {
        let mut params = LayerSet::new();
        for (name, dims) in arch.layer_dims()? {
            params.push(name, Tensor4::zeros(dims))?;
        }
        Ok(TinyModel { arch, params })
    }

    /// Uniform fan-in scaled init, seeded.
    pub fn init_random(arch: Arch, seed: u64) -> Result<Self> {
        let mut model = TinyModel::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, t) in model.params.iter_mut() {
            let fan_in = t.dims().channel_len() as f64;
            let bound = (6.0 / fan_in).sqrt() as f32;
            for v in t.data_mut() {
                *v = rng.random_range(-bound..bound);
            }
        }
        Ok(model)
    }

    pub fn forward(&self, x: &[f32]) -> Result<Vec<f64>> {
        forward_with(&self.arch, &self.params, x).map(|acts| acts.logits)
    }
}

/// Intermediate activations kept for the backward pass.
struct Acts {
    logits: Vec<f64>,
    /// per-layer inputs/pre-activations, meaning depends on the arch
    mlp_hidden_pre: Vec<f64>,
    cnn_z1: Vec<f64>,
    cnn_pool: Vec<f64>,
    cnn_z2: Vec<f64>,
    cnn_flat: Vec<f64>,
}

fn empty_acts(logits: Vec<f64>) -> Acts {
    Acts {
        logits,
        mlp_hidden_pre: Vec::new(),
        cnn_z1: Vec::new(),
        cnn_pool: Vec::new(),
        cnn_z2: Vec::new(),
        cnn_flat: Vec::new(),
    }
}

fn dense_forward(w: &Tensor4, x: &[f64]) -> Vec<f64> {
    let d = w.dims();
    (0..d.c_out)
        .map(|o| {
            w.channel_vec(o)
                .unwrap()
                .iter()
                .zip(x)
                .map(|(&wv, &xv)| wv as f64 * xv)
                .sum()
        })
        .collect()
}

/// Valid 3x3 convolution. Input `c_in` maps of `side x side`, channel-major.
fn conv_forward(w: &Tensor4, input: &[f64], side: usize) -> Vec<f64> {
    let d = w.dims();
    let out_side = side - d.kh + 1;
    let mut out = vec![0.0f64; d.c_out * out_side * out_side];
    for o in 0..d.c_out {
        let wchan = w.channel_vec(o).unwrap();
        for i in 0..d.c_in {
            let imap = &input[i * side * side..(i + 1) * side * side];
            let wk = &wchan[i * d.kh * d.kw..(i + 1) * d.kh * d.kw];
            for y in 0..out_side {
                for x in 0..out_side {
                    let mut acc = 0.0;
                    for m in 0..d.kh {
                        for n in 0..d.kw {
                            acc += imap[(y + m) * side + (x + n)] * wk[m * d.kw + n] as f64;
                        }
                    }
                    out[(o * out_side + y) * out_side + x] += acc;
                }
            }
        }
    }
    out
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn avg_pool2(input: &[f64], channels: usize, side: usize) -> Vec<f64> {
    let half = side / 2;
    let mut out = vec![0.0f64; channels * half * half];
    for c in 0..channels {
        let imap = &input[c * side * side..(c + 1) * side * side];
        for y in 0..half {
            for x in 0..half {
                let s = imap[2 * y * side + 2 * x]
                    + imap[2 * y * side + 2 * x + 1]
                    + imap[(2 * y + 1) * side + 2 * x]
                    + imap[(2 * y + 1) * side + 2 * x + 1];
                out[(c * half + y) * half + x] = s / 4.0;
            }
        }
    }
    out
}

fn forward_with(arch: &Arch, params: &LayerSet, x: &[f32]) -> Result<Acts> {
    if x.len() != arch.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "input dim {} != model dim {}",
            x.len(),
            arch.input_dim()
        )));
    }
    let x64: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    match *arch {
        Arch::Softmax { .. } => {
            let logits = dense_forward(params.tensor(0), &x64);
            Ok(empty_acts(logits))
        }
        Arch::Mlp { .. } => {
            let pre = dense_forward(params.tensor(0), &x64);
            let hidden = relu(&pre);
            let logits = dense_forward(params.tensor(1), &hidden);
            let mut acts = empty_acts(logits);
            acts.mlp_hidden_pre = pre;
            Ok(acts)
        }
        Arch::Cnn { side, c1, c2, .. } => {
            let (s1, sp, s2) = Arch::cnn_spatial(side)?;
            let z1 = conv_forward(params.tensor(0), &x64, side);
            let r1 = relu(&z1);
            let pool = avg_pool2(&r1, c1, s1);
            let z2 = conv_forward(params.tensor(1), &pool, sp);
            let flat = relu(&z2);
            debug_assert_eq!(flat.len(), c2 * s2 * s2);
            let logits = dense_forward(params.tensor(2), &flat);
            let mut acts = empty_acts(logits);
            acts.cnn_z1 = z1;
            acts.cnn_pool = pool;
            acts.cnn_z2 = z2;
            acts.cnn_flat = flat;
            Ok(acts)
        }
    }
}

/// Softmax cross-entropy: loss and gradient wrt logits.
fn softmax_ce(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (logits[label] - max);
    let mut grad: Vec<f64> = exps.iter().map(|&e| e / sum).collect();
    grad[label] -= 1.0;
    (loss, grad)
}

/// Flat f64 gradient accumulator congruent with a LayerSet.
struct GradAcc(Vec<Vec<f64>>);

impl GradAcc {
    fn zeros_like(params: &LayerSet) -> Self {
        GradAcc(params.iter().map(|(_, t)| vec![0.0; t.dims().len()]).collect())
    }

    fn add(&mut self, other: &GradAcc) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    fn into_layer_set(self, template: &LayerSet, scale: f64) -> LayerSet {
        let mut out = LayerSet::new();
        for ((name, t), g) in template.iter().zip(self.0) {
            let data: Vec<f32> = g.iter().map(|&v| (v * scale) as f32).collect();
            out.push(name, Tensor4::from_vec(t.dims(), data).unwrap()).unwrap();
        }
        out
    }
}

fn dense_backward(w: &Tensor4, x: &[f64], dout: &[f64], dw: &mut [f64], dx: Option<&mut [f64]>) {
    let d = w.dims();
    let clen = d.channel_len();
    for o in 0..d.c_out {
        let g = dout[o];
        let dchan = &mut dw[o * clen..(o + 1) * clen];
        for (dwv, &xv) in dchan.iter_mut().zip(x) {
            *dwv += xv * g;
        }
    }
    if let Some(dx) = dx {
        for o in 0..d.c_out {
            let g = dout[o];
            let wchan = w.channel_vec(o).unwrap();
            for (dxv, &wv) in dx.iter_mut().zip(wchan) {
                *dxv += wv as f64 * g;
            }
        }
    }
}

fn conv_backward(
    w: &Tensor4,
    input: &[f64],
    side: usize,
    dout: &[f64],
    dw: &mut [f64],
    dx: Option<&mut [f64]>,
) {
    let d = w.dims();
    let out_side = side - d.kh + 1;
    let clen = d.channel_len();
    for o in 0..d.c_out {
        let dchan = &mut dw[o * clen..(o + 1) * clen];
        for i in 0..d.c_in {
            let imap = &input[i * side * side..(i + 1) * side * side];
            let dk = &mut dchan[i * d.kh * d.kw..(i + 1) * d.kh * d.kw];
            for y in 0..out_side {
                for x in 0..out_side {
                    let g = dout[(o * out_side + y) * out_side + x];
                    for m in 0..d.kh {
                        for n in 0..d.kw {
                            dk[m * d.kw + n] += g * imap[(y + m) * side + (x + n)];
                        }
                    }
                }
            }
        }
    }
    if let Some(dx) = dx {
        for o in 0..d.c_out {
            let wchan = w.channel_vec(o).unwrap();
            for i in 0..d.c_in {
                let dmap = &mut dx[i * side * side..(i + 1) * side * side];
                let wk = &wchan[i * d.kh * d.kw..(i + 1) * d.kh * d.kw];
                for y in 0..out_side {
                    for x in 0..out_side {
                        let g = dout[(o * out_side + y) * out_side + x];
                        for m in 0..d.kh {
                            for n in 0..d.kw {
                                dmap[(y + m) * side + (x + n)] += g * wk[m * d.kw + n] as f64;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn sample_loss_grad(arch: &Arch, params: &LayerSet, x: &[f32], label: usize, acc: &mut GradAcc) -> f64 {
    let acts = forward_with(arch, params, x).expect("shape checked upstream");
    let (loss, dlogits) = softmax_ce(&acts.logits, label);
    let x64: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    match *arch {
        Arch::Softmax { .. } => {
            dense_backward(params.tensor(0), &x64, &dlogits, &mut acc.0[0], None);
        }
        Arch::Mlp { .. } => {
            let hidden = relu(&acts.mlp_hidden_pre);
            let mut dhidden = vec![0.0; hidden.len()];
            dense_backward(params.tensor(1), &hidden, &dlogits, &mut acc.0[1], Some(&mut dhidden));
            for (dh, &pre) in dhidden.iter_mut().zip(&acts.mlp_hidden_pre) {
                if pre <= 0.0 {
                    *dh = 0.0;
                }
            }
            dense_backward(params.tensor(0), &x64, &dhidden, &mut acc.0[0], None);
        }
        Arch::Cnn { side, c1, .. } => {
            let (s1, sp, _) = Arch::cnn_spatial(side).unwrap();
            let mut dflat = vec![0.0; acts.cnn_flat.len()];
            dense_backward(params.tensor(2), &acts.cnn_flat, &dlogits, &mut acc.0[2], Some(&mut dflat));
            // relu on z2
            for (d, &z) in dflat.iter_mut().zip(&acts.cnn_z2) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
            let mut dpool = vec![0.0; acts.cnn_pool.len()];
            conv_backward(params.tensor(1), &acts.cnn_pool, sp, &dflat, &mut acc.0[1], Some(&mut dpool));
            // un-pool: each input of a 2x2 window receives a quarter
            let mut dr1 = vec![0.0; c1 * s1 * s1];
            for c in 0..c1 {
                for y in 0..sp {
                    for xp in 0..sp {
                        let g = dpool[(c * sp + y) * sp + xp] / 4.0;
                        let base = c * s1 * s1;
                        dr1[base + 2 * y * s1 + 2 * xp] += g;
                        dr1[base + 2 * y * s1 + 2 * xp + 1] += g;
                        dr1[base + (2 * y + 1) * s1 + 2 * xp] += g;
                        dr1[base + (2 * y + 1) * s1 + 2 * xp + 1] += g;
                    }
                }
            }
            for (d, &z) in dr1.iter_mut().zip(&acts.cnn_z1) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
            conv_backward(params.tensor(0), &x64, side, &dr1, &mut acc.0[0], None);
        }
    }
    loss
}

/// What the solvers need from a training problem: batched loss/gradient of
/// `L(W) = data term + alpha * ||W||_F^2`.
pub trait Objective: Sync {
    fn n_samples(&self) -> usize;
    fn loss(&self, w: &LayerSet, idx: &[usize]) -> f64;
    fn loss_and_grad(&self, w: &LayerSet, idx: &[usize]) -> (f64, LayerSet);
    /// Exact minimizer of `L(W) + (coeff/2) ||W - M||_F^2`, when one exists
    /// in closed form (quadratic test objectives).
    fn exact_penalized_min(&self, _m: &LayerSet, _coeff: f64) -> Option<LayerSet> {
        None
    }
}

const GRAD_CHUNK: usize = 64;

/// Classification objective: mean cross-entropy over the batch plus weight
/// decay. Per-sample work fans out over fixed-size chunks; chunk results are
/// combined in order, so gradients are seed-stable regardless of thread count.
pub struct ClassifierObjective<'a> {
    pub arch: Arch,
    pub data: &'a Dataset,
    pub alpha: f64,
}

impl<'a> ClassifierObjective<'a> {
    pub fn new(arch: Arch, data: &'a Dataset, alpha: f64) -> Result<Self> {
        if data.dim() != arch.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "dataset dim {} != model input dim {}",
                data.dim(),
                arch.input_dim()
            )));
        }
        Ok(ClassifierObjective { arch, data, alpha })
    }

    fn decay_term(&self, w: &LayerSet) -> f64 {
        let n = w.frobenius_norm();
        self.alpha * n * n
    }
}

impl Objective for ClassifierObjective<'_> {
    fn n_samples(&self) -> usize {
        self.data.len()
    }

    fn loss(&self, w: &LayerSet, idx: &[usize]) -> f64 {
        let chunks: Vec<&[usize]> = idx.chunks(GRAD_CHUNK).collect();
        let partial = exec::map_ordered(&chunks, |chunk| {
            chunk
                .iter()
                .map(|&i| {
                    let acts = forward_with(&self.arch, w, self.data.sample(i)).unwrap();
                    softmax_ce(&acts.logits, self.data.label(i)).0
                })
                .sum::<f64>()
        });
        partial.iter().sum::<f64>() / idx.len() as f64 + self.decay_term(w)
    }

    fn loss_and_grad(&self, w: &LayerSet, idx: &[usize]) -> (f64, LayerSet) {
        let chunks: Vec<&[usize]> = idx.chunks(GRAD_CHUNK).collect();
        let partial = exec::map_ordered(&chunks, |chunk| {
            let mut acc = GradAcc::zeros_like(w);
            let mut loss = 0.0;
            for &i in chunk.iter() {
                loss += sample_loss_grad(&self.arch, w, self.data.sample(i), self.data.label(i), &mut acc);
            }
            (loss, acc)
        });
        let mut total = GradAcc::zeros_like(w);
        let mut loss = 0.0;
        for (l, acc) in &partial {
            loss += l;
            total.add(acc);
        }
        let n = idx.len() as f64;
        let mut grad = total.into_layer_set(w, 1.0 / n);
        // d/dW of alpha ||W||^2
        grad.scale_add(1.0, w, (2.0 * self.alpha) as f32).unwrap();
        (loss / n + self.decay_term(w), grad)
    }
}

/// Squared-error objective for the group-sparse regression benchmark. The
/// single weight layer is `(group_size, n_groups, 1, 1)`, so output channel
/// `g` is exactly feature group `g`.
pub struct RegressionObjective<'a> {
    pub data: &'a RegressionData,
    pub alpha: f64,
}

impl RegressionObjective<'_> {
    pub fn weight_dims(&self) -> Dims {
        Dims::new(self.data.group_size, self.data.n_groups, 1, 1)
    }

    pub fn init_weights(&self) -> LayerSet {
        let mut ls = LayerSet::new();
        ls.push("w", Tensor4::zeros(self.weight_dims())).unwrap();
        ls
    }

    fn predict(&self, w: &Tensor4, x: &[f32]) -> f64 {
        let gs = self.data.group_size;
        let mut acc = 0.0;
        for g in 0..self.data.n_groups {
            let chan = w.channel_vec(g).unwrap();
            for k in 0..gs {
                acc += chan[k] as f64 * x[g * gs + k] as f64;
            }
        }
        acc
    }
}

impl Objective for RegressionObjective<'_> {
    fn n_samples(&self) -> usize {
        self.data.len()
    }

    fn loss(&self, w: &LayerSet, idx: &[usize]) -> f64 {
        let t = w.tensor(0);
        let se: f64 = idx
            .iter()
            .map(|&i| {
                let r = self.predict(t, self.data.sample(i)) - self.data.targets[i] as f64;
                r * r
            })
            .sum();
        let norm = w.frobenius_norm();
        0.5 * se / idx.len() as f64 + self.alpha * norm * norm
    }

    fn loss_and_grad(&self, w: &LayerSet, idx: &[usize]) -> (f64, LayerSet) {
        let t = w.tensor(0);
        let gs = self.data.group_size;
        let dim = self.data.dim();
        let mut g64 = vec![0.0f64; dim];
        let mut se = 0.0;
        for &i in idx {
            let x = self.data.sample(i);
            let r = self.predict(t, x) - self.data.targets[i] as f64;
            se += r * r;
            for g in 0..self.data.n_groups {
                for k in 0..gs {
                    g64[g * gs + k] += r * x[g * gs + k] as f64;
                }
            }
        }
        let n = idx.len() as f64;
        let data: Vec<f32> = (0..dim)
            .map(|j| {
                let (g, k) = (j / gs, j % gs);
                (g64[g * gs + k] / n) as f32
            })
            .collect();
        let mut grad = LayerSet::new();
        grad.push("w", Tensor4::from_vec(self.weight_dims(), data).unwrap()).unwrap();
        grad.scale_add(1.0, w, (2.0 * self.alpha) as f32).unwrap();
        let norm = w.frobenius_norm();
        (0.5 * se / n + self.alpha * norm * norm, grad)
    }
}

/// `L(W) = 0.5 ||W - A||_F^2`: the strongly convex test objective whose
/// penalized subproblem has an analytic minimizer.
pub struct QuadraticObjective {
    pub target: LayerSet,
}

impl Objective for QuadraticObjective {
    fn n_samples(&self) -> usize {
        1
    }

    fn loss(&self, w: &LayerSet, _idx: &[usize]) -> f64 {
        0.5 * w.dist_sq(&self.target).unwrap()
    }

    fn loss_and_grad(&self, w: &LayerSet, _idx: &[usize]) -> (f64, LayerSet) {
        let grad = LayerSet::combine(w, 1.0, &self.target, -1.0).unwrap();
        (self.loss(w, &[]), grad)
    }

    fn exact_penalized_min(&self, m: &LayerSet, coeff: f64) -> Option<LayerSet> {
        // argmin 0.5||W-A||^2 + (coeff/2)||W-M||^2 = (A + coeff M)/(1 + coeff)
        let s = 1.0 / (1.0 + coeff);
        Some(LayerSet::combine(&self.target, s as f32, m, (coeff * s) as f32).unwrap())
    }
}

/// TOP-1 accuracy; argmax ties resolve to the lowest class index.
pub fn evaluate_accuracy(model: &TinyModel, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    if data.dim() != model.arch.input_dim() {
        return Err(Error::ShapeMismatch("dataset dim != model dim".into()));
    }
    let correct = exec::map_indices(data.len(), |i| {
        let logits = model.forward(data.sample(i)).unwrap();
        let mut best = 0usize;
        for (c, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = c;
            }
        }
        (best == data.label(i)) as usize
    });
    Ok(correct.iter().sum::<usize>() as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_blobs, BlobsSpec};

    #[test]
    fn zero_weights_give_uniform_logits() {
        let model = TinyModel::zeros(Arch::Cnn { side: 8, c1: 4, c2: 6, n_classes: 3 }).unwrap();
        let x = vec![0.7f32; 64];
        let logits = model.forward(&x).unwrap();
        assert!(logits.iter().all(|&l| l == 0.0));
        let (loss, _) = softmax_ce(&logits, 1);
        assert!((loss - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn softmax_regression_is_linear_readout() {
        let arch = Arch::Softmax { dim: 2, n_classes: 2 };
        let mut model = TinyModel::zeros(arch).unwrap();
        // identity-like readout
        model.params.tensor_mut(0).set(0, 0, 0, 0, 1.0);
        model.params.tensor_mut(0).set(1, 1, 0, 0, 1.0);
        let logits = model.forward(&[0.25, -0.5]).unwrap();
        assert_eq!(logits, vec![0.25, -0.5]);
    }

    #[test]
    fn forward_rejects_wrong_dim() {
        let model = TinyModel::zeros(Arch::Softmax { dim: 3, n_classes: 2 }).unwrap();
        assert!(model.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn uniform_loss_includes_decay() {
        let spec = BlobsSpec { n_classes: 4, dim: 10, n_samples: 40, ..BlobsSpec::default() };
        let data = synth_blobs(&spec, 1);
        let arch = Arch::Softmax { dim: 10, n_classes: 4 };
        let model = TinyModel::init_random(arch, 2).unwrap();
        let alpha = 0.01;
        let obj = ClassifierObjective::new(arch, &data, alpha).unwrap();
        let obj0 = ClassifierObjective::new(arch, &data, 0.0).unwrap();
        let idx: Vec<usize> = (0..data.len()).collect();
        let norm = model.params.frobenius_norm();
        let with = obj.loss(&model.params, &idx);
        let without = obj0.loss(&model.params, &idx);
        assert!((with - without - alpha * norm * norm).abs() < 1e-12);
    }

    #[test]
    fn analytic_softmax_gradient_single_sample() {
        // one sample, alpha = 0: dL/dW[i][c] = x[i] (p_c - 1{c=y})
        let mut data = Dataset::new(2, 3);
        data.push(&[0.4, -1.2], 2).unwrap();
        let arch = Arch::Softmax { dim: 2, n_classes: 3 };
        let model = TinyModel::init_random(arch, 5).unwrap();
        let obj = ClassifierObjective::new(arch, &data, 0.0).unwrap();
        let (_, grad) = obj.loss_and_grad(&model.params, &[0]);
        let logits = model.forward(data.sample(0)).unwrap();
        let (_, dl) = softmax_ce(&logits, 2);
        for c in 0..3 {
            for i in 0..2 {
                let expect = data.sample(0)[i] as f64 * dl[c];
                let got = grad.tensor(0).get(i, c, 0, 0) as f64;
                assert!((got - expect).abs() < 1e-6, "c={c} i={i}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn accuracy_tie_breaks_to_class_zero() {
        let spec = BlobsSpec { n_classes: 3, dim: 4, n_samples: 30, ..BlobsSpec::default() };
        let data = synth_blobs(&spec, 4);
        let model = TinyModel::zeros(Arch::Softmax { dim: 4, n_classes: 3 }).unwrap();
        let acc = evaluate_accuracy(&model, &data).unwrap();
        // zero logits everywhere -> always predicts class 0; blobs are balanced
        assert!((acc - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_predictor_on_single_class() {
        let mut data = Dataset::new(2, 2);
        for _ in 0..5 {
            data.push(&[1.0, 1.0], 0).unwrap();
        }
        let model = TinyModel::zeros(Arch::Softmax { dim: 2, n_classes: 2 }).unwrap();
        assert_eq!(evaluate_accuracy(&model, &data).unwrap(), 1.0);
    }

    #[test]
    fn quadratic_exact_min_matches_gradient_stationarity() {
        let mut target = LayerSet::new();
        target
            .push("a", Tensor4::from_vec(Dims::new(2, 2, 1, 1), vec![1.0, -2.0, 0.5, 3.0]).unwrap())
            .unwrap();
        let obj = QuadraticObjective { target: target.clone() };
        let mut m = target.clone();
        for (_, t) in m.iter_mut() {
            for v in t.data_mut() {
                *v *= -0.3;
            }
        }
        let coeff = 1.7;
        let w = obj.exact_penalized_min(&m, coeff).unwrap();
        // stationarity: (W - A) + coeff (W - M) = 0
        for i in 0..4 {
            let wv = w.tensor(0).data()[i] as f64;
            let av = target.tensor(0).data()[i] as f64;
            let mv = m.tensor(0).data()[i] as f64;
            assert!(((wv - av) + coeff * (wv - mv)).abs() < 1e-6);
        }
    }
}
