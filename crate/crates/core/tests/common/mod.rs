//! Shared test oracles, independent of the library's solution paths.
#![allow(dead_code)] // each consumer uses a subset

use goprune_core::model::Objective;
use goprune_core::prox::{prox_objective, ProxParams};
use goprune_core::tensor::LayerSet;

/// Brute-force minimizer of `lambda |x|^p + (x - a)^2 / 2` by grid search
/// over `[-2|a|-1, 2|a|+1]`: a coarse pass at step 1e-2 followed by a
/// refinement pass at step 1e-5 around the coarse argmin (the objective is
/// smooth away from 0, so the two-stage grid reaches the same resolution
/// as a flat 1e-5 grid). Returns (argmin, objective value).
pub fn grid_prox_oracle(a: f64, params: &ProxParams) -> (f64, f64) {
    let half = 2.0 * a.abs() + 1.0;
    let coarse = 1e-2;
    let fine = 1e-5;
    let mut best_x = 0.0;
    let mut best_v = prox_objective(0.0, a, params);
    let n = (2.0 * half / coarse) as i64;
    for i in 0..=n {
        let x = -half + coarse * i as f64;
        let v = prox_objective(x, a, params);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    let lo = best_x - 2.0 * coarse;
    let m = (4.0 * coarse / fine) as i64;
    for i in 0..=m {
        let x = lo + fine * i as f64;
        let v = prox_objective(x, a, params);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    // x = 0 exactly is always a candidate (the grid may straddle it)
    let v0 = prox_objective(0.0, a, params);
    if v0 < best_v {
        best_v = v0;
        best_x = 0.0;
    }
    (best_x, best_v)
}

/// Radial oracle for the group prox: the minimizer of
/// `lambda ||x||^p + ||x - n||^2 / 2` lies on the ray through `n`, so grid
/// the magnitude `t >= 0` of `x = t n/||n||` and return the best objective.
pub fn radial_group_oracle(n: &[f32], params: &ProxParams) -> f64 {
    let norm = n.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    // along the ray the objective is lambda t^p + (t - ||n||)^2 / 2
    let (_, v) = grid_prox_oracle(norm, params);
    v
}

/// Objective value of the group problem at an explicit point.
pub fn group_objective(x: &[f32], n: &[f32], params: &ProxParams) -> f64 {
    let xnorm = x.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    let pen = if params.p == 0.0 {
        if xnorm == 0.0 { 0.0 } else { params.lambda }
    } else {
        params.lambda * xnorm.powf(params.p)
    };
    let dist: f64 = x
        .iter()
        .zip(n)
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    pen + 0.5 * dist
}

/// Central finite differences over every parameter of `w`. Returns the
/// worst relative error between the analytic gradient and the numeric one.
pub fn finite_diff_max_rel_err(obj: &impl Objective, w: &LayerSet, idx: &[usize]) -> f64 {
    let (_, grad) = obj.loss_and_grad(w, idx);
    let mut worst = 0.0f64;
    let n_layers = w.len();
    for layer in 0..n_layers {
        let n = w.tensor(layer).dims().len();
        for i in 0..n {
            let orig = w.tensor(layer).data()[i];
            let mut wp = w.clone();
            wp.tensor_mut(layer).data_mut()[i] = orig + 1e-4;
            let mut wm = w.clone();
            wm.tensor_mut(layer).data_mut()[i] = orig - 1e-4;
            // effective step after f32 rounding of the perturbed weight
            let h = (wp.tensor(layer).data()[i] as f64 - wm.tensor(layer).data()[i] as f64) / 2.0;
            let fd = (obj.loss(&wp, idx) - obj.loss(&wm, idx)) / (2.0 * h);
            let an = grad.tensor(layer).data()[i] as f64;
            let denom = an.abs().max(fd.abs()).max(1e-4);
            let rel = (an - fd).abs() / denom;
            if rel > worst {
                worst = rel;
            }
        }
    }
    worst
}
