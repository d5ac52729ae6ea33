//! The `prox-check` subcommand: sweep random (a, lambda, p) triples,
//! compare the proximal operator against a brute-force grid minimizer, and
//! fail if any objective gap exceeds the tolerance.
//!
//! The grid minimizer here is an intentionally independent reimplementation
//! (not shared with the library), so a regression in the closed forms or
//! threshold logic cannot cancel out.

use std::io::Write;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use goprune_core::prox::{prox_objective, scalar_prox, threshold_kappa, ProxParams};
use goprune_core::{Error, Result};

pub const GAP_TOL: f64 = 1e-6;
const P_CHOICES: [f64; 5] = [0.0, 0.3, 0.5, 2.0 / 3.0, 0.9];

pub struct ProxCheckReport {
    pub samples: usize,
    pub worst_gap: f64,
    pub failures: usize,
}

/// Two-stage grid minimization of `lambda |x|^p + (x - a)^2 / 2`: coarse
/// step 1e-2 over [-2|a|-1, 2|a|+1], then step 1e-5 around the coarse
/// argmin; x = 0 is always a candidate.
fn grid_min(a: f64, params: &ProxParams) -> f64 {
    let half = 2.0 * a.abs() + 1.0;
    let coarse = 1e-2;
    let fine = 1e-5;
    let mut best_x = 0.0;
    let mut best = prox_objective(0.0, a, params);
    let n = (2.0 * half / coarse) as i64;
    for i in 0..=n {
        let x = -half + coarse * i as f64;
        let v = prox_objective(x, a, params);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    let lo = best_x - 2.0 * coarse;
    let m = (4.0 * coarse / fine) as i64;
    for i in 0..=m {
        let x = lo + fine * i as f64;
        let v = prox_objective(x, a, params);
        if v < best {
            best = v;
        }
    }
    best
}

pub fn cmd_prox_check(
    samples: usize,
    seed: u64,
    out: &Path,
    inject_kappa_fault: bool,
) -> Result<ProxCheckReport> {
    if samples == 0 {
        return Err(Error::InvalidParam("prox-check sweep must not be empty".into()));
    }
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(out)?;
    writeln!(f, "a,lambda,p,prox_value,oracle_value,objective_gap")?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_gap = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..samples {
        let a = rng.random_range(-10.0..10.0);
        let lambda = rng.random_range(0.01..10.0);
        let p = P_CHOICES[rng.random_range(0..P_CHOICES.len())];
        let params = ProxParams::new(lambda, p)?;
        let mut value = scalar_prox(a, &params).value;
        if inject_kappa_fault && a.abs() < 1.01 * threshold_kappa(&params) {
            // test hook: pretend the threshold were 1% higher
            value = 0.0;
        }
        let mine = prox_objective(value, a, &params);
        let oracle = grid_min(a, &params);
        let gap = mine - oracle;
        if gap > worst_gap {
            worst_gap = gap;
        }
        if gap > GAP_TOL {
            failures += 1;
        }
        writeln!(
            f,
            "{a},{lambda},{p},{value},{oracle},{gap}",
        )?;
    }
    Ok(ProxCheckReport { samples, worst_gap, failures })
}
