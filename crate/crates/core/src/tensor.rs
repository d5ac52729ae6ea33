//! Dense 4D weight tensors with contiguous output-channel slices.
//!
//! A tensor of shape `(c_in, c_out, kh, kw)` stores channel `j` (all weights
//! feeding output channel `j`) as one contiguous run of `c_in * kh * kw`
//! floats, so vectorizing a channel is a plain slice. Storage is `f32`;
//! every norm accumulates in `f64`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub c_in: usize,
    pub c_out: usize,
    pub kh: usize,
    pub kw: usize,
}

impl Dims {
    pub fn new(c_in: usize, c_out: usize, kh: usize, kw: usize) -> Self {
        Dims { c_in, c_out, kh, kw }
    }

    pub fn len(&self) -> usize {
        self.c_in * self.c_out * self.kh * self.kw
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of one output-channel slice.
    pub fn channel_len(&self) -> usize {
        self.c_in * self.kh * self.kw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dims: Dims,
    data: Vec<f32>,
}

impl Tensor4 {
    pub fn zeros(dims: Dims) -> Self {
        Tensor4 {
            dims,
            data: vec![0.0; dims.len()],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<f32>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} elements for dims {:?}, got {}",
                dims.len(),
                dims,
                data.len()
            )));
        }
        Ok(Tensor4 { dims, data })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// Flat index of element `(i, j, m, n)` where `j` is the output channel.
    #[inline]
    pub fn index(&self, i: usize, j: usize, m: usize, n: usize) -> usize {
        let d = self.dims;
        debug_assert!(i < d.c_in && j < d.c_out && m < d.kh && n < d.kw);
        ((j * d.c_in + i) * d.kh + m) * d.kw + n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize, n: usize) -> f32 {
        self.data[self.index(i, j, m, n)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, m: usize, n: usize, v: f32) {
        let idx = self.index(i, j, m, n);
        self.data[idx] = v;
    }

    /// Vectorized channel `j`, a contiguous slice of length `c_in * kh * kw`.
    pub fn channel_vec(&self, j: usize) -> Result<&[f32]> {
        if j >= self.dims.c_out {
            return Err(Error::ChannelOutOfRange {
                index: j,
                n_channels: self.dims.c_out,
            });
        }
        let len = self.dims.channel_len();
        Ok(&self.data[j * len..(j + 1) * len])
    }

    pub fn channel_vec_mut(&mut self, j: usize) -> Result<&mut [f32]> {
        if j >= self.dims.c_out {
            return Err(Error::ChannelOutOfRange {
                index: j,
                n_channels: self.dims.c_out,
            });
        }
        let len = self.dims.channel_len();
        Ok(&mut self.data[j * len..(j + 1) * len])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise `self = self * a + other * b`.
    pub fn scale_add(&mut self, a: f32, other: &Tensor4, b: f32) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x * a + *y * b;
        }
        Ok(())
    }
}

/// Frobenius norm, Eq. (1). Sum of squares in f64, then sqrt.
pub fn frobenius_norm(x: &Tensor4) -> f64 {
    sum_sq(x.data()).sqrt()
}

pub(crate) fn sum_sq(v: &[f32]) -> f64 {
    v.iter().map(|&e| {
        let e = e as f64;
        e * e
    }).sum()
}

pub(crate) fn l2_norm(v: &[f32]) -> f64 {
    sum_sq(v).sqrt()
}

/// `||x||_{2,p}^p`: the sum over output channels of the channel l2 norm
/// raised to `p`. For `p = 0` this counts channels with nonzero l2 norm
/// (exact-zero test; the group prox produces exact zeros).
pub fn l2p_norm_p(x: &Tensor4, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParam(format!("p must be in [0,1), got {p}")));
    }
    let mut acc = 0.0;
    for j in 0..x.dims().c_out {
        let norm = l2_norm(x.channel_vec(j)?);
        if p == 0.0 {
            if norm != 0.0 {
                acc += 1.0;
            }
        } else {
            acc += norm.powf(p);
        }
    }
    Ok(acc)
}

/// An ordered set of named weight tensors, one per prunable layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSet {
    layers: Vec<(String, Tensor4)>,
}

impl LayerSet {
    pub fn new() -> Self {
        LayerSet { layers: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor4) -> Result<()> {
        let name = name.into();
        if self.layers.iter().any(|(n, _)| *n == name) {
            return Err(Error::InvalidParam(format!("duplicate layer name {name}")));
        }
        self.layers.push((name, tensor));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor4)> {
        self.layers.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor4)> {
        self.layers.iter_mut().map(|(n, t)| (n.as_str(), t))
    }

    pub fn tensor(&self, idx: usize) -> &Tensor4 {
        &self.layers[idx].1
    }

    pub fn tensor_mut(&mut self, idx: usize) -> &mut Tensor4 {
        &mut self.layers[idx].1
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.layers[idx].0
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor4> {
        self.layers.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn shape_congruent(&self, other: &LayerSet) -> bool {
        self.len() == other.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|((n1, t1), (n2, t2))| n1 == n2 && t1.dims() == t2.dims())
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|(_, t)| t.dims().len()).sum()
    }

    /// Frobenius norm over all layers jointly.
    pub fn frobenius_norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|(_, t)| sum_sq(t.data()))
            .sum::<f64>()
            .sqrt()
    }

    /// Squared Frobenius distance `||self - other||_F^2`.
    pub fn dist_sq(&self, other: &LayerSet) -> Result<f64> {
        if !self.shape_congruent(other) {
            return Err(Error::ShapeMismatch("layer sets not congruent".into()));
        }
        let mut acc = 0.0;
        for ((_, a), (_, b)) in self.layers.iter().zip(&other.layers) {
            for (x, y) in a.data().iter().zip(b.data()) {
                let d = *x as f64 - *y as f64;
                acc += d * d;
            }
        }
        Ok(acc)
    }

    /// Elementwise `self = self * a + other * b` across every layer.
    pub fn scale_add(&mut self, a: f32, other: &LayerSet, b: f32) -> Result<()> {
        if !self.shape_congruent(other) {
            return Err(Error::ShapeMismatch("layer sets not congruent".into()));
        }
        for ((_, x), (_, y)) in self.layers.iter_mut().zip(&other.layers) {
            x.scale_add(a, y, b)?;
        }
        Ok(())
    }

    /// Convex-style combination `a * x + b * y` as a new set.
    pub fn combine(x: &LayerSet, a: f32, y: &LayerSet, b: f32) -> Result<LayerSet> {
        let mut out = x.clone();
        out.scale_add(a, y, b)?;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|(_, t)| t.is_finite())
    }

    /// Fraction of output channels (over all layers) that are exactly zero.
    pub fn zero_channel_fraction(&self) -> f64 {
        let mut total = 0usize;
        let mut zero = 0usize;
        for (_, t) in &self.layers {
            for j in 0..t.dims().c_out {
                total += 1;
                if t.channel_vec(j).unwrap().iter().all(|&v| v == 0.0) {
                    zero += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            zero as f64 / total as f64
        }
    }
}

impl Default for LayerSet {
    fn default() -> Self {
        Self::new()
    }
}
