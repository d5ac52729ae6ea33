//! Proximal alternating minimization for the group-sparse compression
//! objective
//!
//!   f(W, U) = L(W) + lambda * ||U||_{2,p}^p + (beta/2) ||W - U||_F^2
//!
//! One outer iteration is one SGD epoch on the W block (penalty pulled
//! toward the frozen mix M of U^k and W^k) followed by the closed-form
//! channelwise group prox on the U block.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::model::Objective;
use crate::prox::{group_prox, ProxParams};
use crate::tensor::{l2p_norm_p, LayerSet, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub p: f64,
    pub lambda: f64,
    pub beta: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// weight decay inside L(W)
    pub alpha: f64,
    /// SGD learning rate
    pub eta: f64,
    pub outer_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            p: 0.5,
            lambda: 1e-3,
            beta: 1.5e-3,
            rho1: 1.5e-3,
            rho2: 1.5e-3,
            alpha: 1e-4,
            eta: 0.01,
            outer_epochs: 15,
            batch_size: 128,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::InvalidParam(format!("p must be in [0,1), got {}", self.p)));
        }
        for (name, v) in [("beta", self.beta), ("rho1", self.rho1), ("rho2", self.rho2), ("eta", self.eta)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParam(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidParam(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.outer_epochs < 1 {
            return Err(Error::InvalidParam("outer_epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidParam("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PamState {
    pub w: LayerSet,
    pub u: LayerSet,
    pub k: usize,
    pub objective_trace: Vec<f64>,
}

/// Per-outer-iteration record emitted alongside the state.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub w_time_ms: f64,
    pub u_time_ms: f64,
    pub zero_channel_fraction: f64,
}

/// How the W subproblem is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WSolver {
    /// One epoch of mini-batch SGD (Algorithm 2).
    Sgd,
    /// Closed-form minimizer supplied by the objective; only available on
    /// quadratic test objectives.
    Exact,
}

/// Value of the penalized objective f(W, U) over the given sample indices.
pub fn penalized_objective(
    obj: &impl Objective,
    w: &LayerSet,
    u: &LayerSet,
    hp: &HyperParams,
    idx: &[usize],
) -> Result<f64> {
    if !w.shape_congruent(u) {
        return Err(Error::ShapeMismatch("W and U not congruent".into()));
    }
    let mut sparsity = 0.0;
    for (_, t) in u.iter() {
        sparsity += l2p_norm_p(t, hp.p)?;
    }
    let coupling = 0.5 * hp.beta * w.dist_sq(u)?;
    let loss = obj.loss(w, idx);
    let total = loss + hp.lambda * sparsity + coupling;
    if !total.is_finite() {
        return Err(Error::NonFinite("penalized objective".into()));
    }
    Ok(total)
}

/// One epoch of mini-batch SGD on `L(W) + ((beta+rho1)/2)||W - M||_F^2`,
/// with `M = (beta U^k + rho1 W^k)/(beta + rho1)` frozen at epoch start.
/// Per step: `W <- W - eta (grad L + (beta+rho1)(W - M))`.
pub fn w_update(
    obj: &impl Objective,
    w: &LayerSet,
    u: &LayerSet,
    hp: &HyperParams,
    rng: &mut ChaCha8Rng,
) -> Result<LayerSet> {
    let coeff = hp.beta + hp.rho1;
    let m = LayerSet::combine(u, (hp.beta / coeff) as f32, w, (hp.rho1 / coeff) as f32)?;
    let mut cur = w.clone();
    let mut idx: Vec<usize> = (0..obj.n_samples()).collect();
    idx.shuffle(rng);
    for batch in idx.chunks(hp.batch_size) {
        let (loss, grad) = obj.loss_and_grad(&cur, batch);
        if !loss.is_finite() {
            return Err(Error::NonFinite("mini-batch loss".into()));
        }
        // W - eta * [grad + coeff (W - M)]
        let eta = hp.eta as f32;
        let shrink = 1.0 - hp.eta as f32 * coeff as f32;
        cur.scale_add(shrink, &grad, -eta)?;
        cur.scale_add(1.0, &m, hp.eta as f32 * coeff as f32)?;
        if !cur.is_finite() {
            return Err(Error::NonFinite("W iterate".into()));
        }
    }
    Ok(cur)
}

/// Closed-form U update: `N = (beta W^{k+1} + rho2 U^k)/(beta + rho2)`,
/// then the group prox with weight `lambda/(beta + rho2)` on every output
/// channel of every layer.
pub fn u_update(w_next: &LayerSet, u: &LayerSet, hp: &HyperParams) -> Result<LayerSet> {
    let coeff = hp.beta + hp.rho2;
    let n = LayerSet::combine(w_next, (hp.beta / coeff) as f32, u, (hp.rho2 / coeff) as f32)?;
    if hp.lambda == 0.0 {
        return Ok(n);
    }
    let params = ProxParams::new(hp.lambda / coeff, hp.p)?;
    let mut out = LayerSet::new();
    for (name, t) in n.iter() {
        let c_out = t.dims().c_out;
        let channels = exec::map_indices(c_out, |j| group_prox(t.channel_vec(j).unwrap(), &params));
        let mut tensor = Tensor4::zeros(t.dims());
        for (j, chan) in channels.iter().enumerate() {
            tensor.channel_vec_mut(j)?.copy_from_slice(chan);
        }
        out.push(name, tensor)?;
    }
    Ok(out)
}

/// Algorithm-1 outer loop. `U^0 = W^0`; stops after `outer_epochs`
/// iterations; returns the final state plus per-iteration trace rows.
pub fn run_pam(
    obj: &impl Objective,
    init_w: &LayerSet,
    hp: &HyperParams,
    solver: WSolver,
) -> Result<(PamState, Vec<TraceRow>)> {
    let mut state = PamState {
        w: init_w.clone(),
        u: init_w.clone(),
        k: 0,
        objective_trace: Vec::new(),
    };
    let mut trace = Vec::new();
    let full_idx: Vec<usize> = (0..obj.n_samples()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    for _ in 0..hp.outer_epochs {
        let t0 = Instant::now();
        let w_next = match solver {
            WSolver::Sgd => w_update(obj, &state.w, &state.u, hp, &mut rng)?,
            WSolver::Exact => {
                let coeff = hp.beta + hp.rho1;
                let m = LayerSet::combine(
                    &state.u,
                    (hp.beta / coeff) as f32,
                    &state.w,
                    (hp.rho1 / coeff) as f32,
                )?;
                obj.exact_penalized_min(&m, coeff).ok_or_else(|| {
                    Error::InvalidParam("objective has no exact W solver".into())
                })?
            }
        };
        let w_time = t0.elapsed().as_secs_f64() * 1e3;
        let t1 = Instant::now();
        let u_next = u_update(&w_next, &state.u, hp)?;
        let u_time = t1.elapsed().as_secs_f64() * 1e3;
        state.w = w_next;
        state.u = u_next;
        state.k += 1;
        let objective = penalized_objective(obj, &state.w, &state.u, hp, &full_idx)?;
        state.objective_trace.push(objective);
        trace.push(TraceRow {
            iteration: state.k,
            objective,
            w_time_ms: w_time,
            u_time_ms: u_time,
            zero_channel_fraction: state.u.zero_channel_fraction(),
        });
    }
    Ok((state, trace))
}
