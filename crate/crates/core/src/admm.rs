//! Reconstructed ADMM baseline: elementwise lp (unstructured) sparsity on
//! the same W = U splitting, scaled dual form.
//!
//! The U update applies the scalar prox to every individual weight and
//! always solves the stationarity equation by Newton iteration, never by a
//! closed form. That per-scalar iterative cost is the property being
//! compared against the channelwise closed-form update.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::model::Objective;
use crate::pam::{HyperParams, TraceRow};
use crate::prox::{scalar_prox, scalar_prox_iterative, ProxParams};
use crate::tensor::LayerSet;

#[derive(Debug, Clone)]
pub struct AdmmState {
    pub w: LayerSet,
    pub u: LayerSet,
    /// scaled dual variable
    pub z: LayerSet,
    pub k: usize,
    pub objective_trace: Vec<f64>,
}

impl AdmmState {
    pub fn primal_residual(&self) -> f64 {
        self.w.dist_sq(&self.u).unwrap().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmmOptions {
    /// Ablation switch: dispatch the scalar prox to closed forms where they
    /// exist instead of forcing Newton.
    pub use_closed_forms: bool,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        AdmmOptions { use_closed_forms: false }
    }
}

fn elementwise_lp_p(w: &LayerSet, p: f64) -> f64 {
    w.iter()
        .flat_map(|(_, t)| t.data())
        .map(|&v| (v.abs() as f64).powf(p))
        .sum()
}

/// Elementwise prox of `(lambda/beta)|.|^p` applied to `W + Z`, in
/// fixed-size chunks so the result is thread-count independent.
pub fn admm_u_update(
    w: &LayerSet,
    z: &LayerSet,
    hp: &HyperParams,
    opts: &AdmmOptions,
) -> Result<LayerSet> {
    let params = ProxParams::new(hp.lambda / hp.beta, hp.p)?;
    let mut u = LayerSet::combine(w, 1.0, z, 1.0)?;
    let closed = opts.use_closed_forms;
    for (_, t) in u.iter_mut() {
        exec::for_each_chunk_mut(t.data_mut(), 1024, |chunk| {
            for v in chunk.iter_mut() {
                let r = if closed {
                    scalar_prox(*v as f64, &params)
                } else {
                    scalar_prox_iterative(*v as f64, &params)
                };
                *v = r.value as f32;
            }
        });
    }
    Ok(u)
}

/// Scaled-dual ADMM on the splitting `W = U`: one SGD epoch on
/// `L(W) + (beta/2)||W - U + Z||_F^2`, elementwise lp prox for U, then
/// `Z <- Z + W - U`. Same epoch budget and trace schema as the PAM loop.
pub fn run_admm(
    obj: &impl Objective,
    init_w: &LayerSet,
    hp: &HyperParams,
    opts: &AdmmOptions,
) -> Result<(AdmmState, Vec<TraceRow>)> {
    if hp.lambda > 0.0 && !(hp.p > 0.0 && hp.p < 1.0) {
        return Err(Error::InvalidParam(format!(
            "ADMM baseline requires p in (0,1), got {}",
            hp.p
        )));
    }
    let mut state = AdmmState {
        w: init_w.clone(),
        u: init_w.clone(),
        z: {
            let mut z = init_w.clone();
            for (_, t) in z.iter_mut() {
                t.data_mut().fill(0.0);
            }
            z
        },
        k: 0,
        objective_trace: Vec::new(),
    };
    let full_idx: Vec<usize> = (0..obj.n_samples()).collect();
    let mut trace = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    for _ in 0..hp.outer_epochs {
        let t0 = Instant::now();
        // anchor U - Z frozen for the epoch
        let anchor = LayerSet::combine(&state.u, 1.0, &state.z, -1.0)?;
        let mut idx: Vec<usize> = (0..obj.n_samples()).collect();
        idx.shuffle(&mut rng);
        for batch in idx.chunks(hp.batch_size) {
            let (loss, grad) = obj.loss_and_grad(&state.w, batch);
            if !loss.is_finite() {
                return Err(Error::NonFinite("mini-batch loss".into()));
            }
            let eta = hp.eta as f32;
            let shrink = 1.0 - hp.eta as f32 * hp.beta as f32;
            state.w.scale_add(shrink, &grad, -eta)?;
            state.w.scale_add(1.0, &anchor, hp.eta as f32 * hp.beta as f32)?;
            if !state.w.is_finite() {
                return Err(Error::NonFinite("W iterate".into()));
            }
        }
        let w_time = t0.elapsed().as_secs_f64() * 1e3;
        let t1 = Instant::now();
        state.u = if hp.lambda == 0.0 {
            LayerSet::combine(&state.w, 1.0, &state.z, 1.0)?
        } else {
            admm_u_update(&state.w, &state.z, hp, opts)?
        };
        let u_time = t1.elapsed().as_secs_f64() * 1e3;
        let mut z = state.z.clone();
        z.scale_add(1.0, &state.w, 1.0)?;
        z.scale_add(1.0, &state.u, -1.0)?;
        state.z = z;
        state.k += 1;
        let objective = obj.loss(&state.w, &full_idx)
            + hp.lambda * elementwise_lp_p(&state.u, hp.p)
            + 0.5 * hp.beta * state.w.dist_sq(&state.u)?;
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
