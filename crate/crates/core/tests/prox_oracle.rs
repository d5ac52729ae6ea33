//! Oracle checks for the scalar and group proximal operators against
//! independent brute-force grid minimization.

mod common;

use common::{grid_prox_oracle, group_objective, radial_group_oracle};
use goprune_core::prox::{
    branch_value_c, group_prox, prox_objective, scalar_prox, solve_varpi, solve_varpi_newton,
    threshold_kappa, ProxParams,
};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn params(lambda: f64, p: f64) -> ProxParams {
    ProxParams::new(lambda, p).unwrap()
}

#[test]
fn kappa_matches_grid_jump_location_at_p_half() {
    // the smallest |a| whose grid minimizer is nonzero brackets kappa
    let pr = params(1.0, 0.5);
    let kappa = threshold_kappa(&pr);
    let (below, _) = grid_prox_oracle(kappa - 1e-3, &pr);
    let (above, _) = grid_prox_oracle(kappa + 1e-3, &pr);
    assert_eq!(below, 0.0);
    assert!(above > 0.0);
}

#[test]
fn branch_c_matches_grid_tie_magnitude() {
    for (l, p) in [(1.0, 2.0 / 3.0), (0.7, 0.5), (2.0, 0.3)] {
        let pr = params(l, p);
        let kappa = threshold_kappa(&pr);
        let c = branch_value_c(&pr);
        // just above the tie the nonzero minimizer sits just above c
        let (x, _) = grid_prox_oracle(kappa + 1e-4, &pr);
        assert!(x > 0.0);
        assert!((x - c).abs() < 1e-2, "l={l} p={p}: argmin {x} vs c {c}");
    }
}

#[test]
fn scalar_prox_matches_grid_argmin() {
    for (a, l, p) in [(1.5, 0.5, 0.5), (1.5, 0.5, 0.3)] {
        let pr = params(l, p);
        let (x_star, _) = grid_prox_oracle(a, &pr);
        let got = scalar_prox(a, &pr).value;
        assert!((got - x_star).abs() < 1e-4, "a={a} l={l} p={p}: {got} vs {x_star}");
    }
}

#[test]
fn varpi_agrees_with_grid_above_threshold() {
    for p in [0.5, 2.0 / 3.0] {
        let pr = params(1.0, p);
        let a = 2.0 * threshold_kappa(&pr);
        let x = solve_varpi(a, &pr).unwrap();
        let newton = solve_varpi_newton(a, &pr).unwrap();
        assert!((x - newton).abs() < 1e-9);
        let (grid_x, _) = grid_prox_oracle(a, &pr);
        assert!((x - grid_x).abs() < 1e-4);
    }
}

#[test]
fn sampled_sweep_objective_never_beaten_by_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240817);
    let ps = [0.0, 0.3, 0.5, 2.0 / 3.0, 0.9];
    for _ in 0..300 {
        let a = rng.random_range(-10.0..10.0);
        let l = rng.random_range(0.01..10.0);
        let p = ps[rng.random_range(0..ps.len())];
        let pr = params(l, p);
        let x = scalar_prox(a, &pr).value;
        let (_, best) = grid_prox_oracle(a, &pr);
        let mine = prox_objective(x, a, &pr);
        assert!(
            mine <= best + 1e-6,
            "a={a} l={l} p={p}: objective {mine} vs grid {best}"
        );
    }
}

#[test]
fn group_prox_beats_radial_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pr = params(0.5, 0.5);
    for _ in 0..50 {
        let n: Vec<f32> = (0..8).map(|_| rng.random_range(-1.5f32..1.5)).collect();
        let out = group_prox(&n, &pr);
        let mine = group_objective(&out, &n, &pr);
        let best = radial_group_oracle(&n, &pr);
        assert!(mine <= best + 1e-5, "{mine} vs {best}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_prox_optimal_vs_grid(
        a in -6.0f64..6.0,
        l in 0.01f64..5.0,
        pi in 0usize..5,
    ) {
        let p = [0.0, 0.3, 0.5, 2.0 / 3.0, 0.9][pi];
        let pr = params(l, p);
        let x = scalar_prox(a, &pr).value;
        let (_, best) = grid_prox_oracle(a, &pr);
        prop_assert!(prox_objective(x, a, &pr) <= best + 1e-6);
    }

    #[test]
    fn prop_symmetry_shrinkage_deadzone(
        a in 0.0f64..8.0,
        l in 0.01f64..5.0,
        pi in 0usize..5,
    ) {
        let p = [0.0, 0.3, 0.5, 2.0 / 3.0, 0.9][pi];
        let pr = params(l, p);
        let r = scalar_prox(a, &pr);
        prop_assert_eq!(scalar_prox(-a, &pr).value, -r.value);
        prop_assert!(r.value.abs() <= a.abs() + 1e-12);
        let kappa = threshold_kappa(&pr);
        if a < kappa {
            prop_assert_eq!(r.value, 0.0);
        } else if a > kappa {
            prop_assert!(r.value.abs() >= branch_value_c(&pr) - 1e-9);
        }
    }

    #[test]
    fn prop_group_norm_consistency(
        seed in 0u64..1000,
        dim in 1usize..16,
        l in 0.05f64..3.0,
        pi in 0usize..3,
    ) {
        let p = [0.0, 0.5, 2.0 / 3.0][pi];
        let pr = params(l, p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: Vec<f32> = (0..dim).map(|_| rng.random_range(-2.0f32..2.0)).collect();
        let out = group_prox(&n, &pr);
        let out_norm = out.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        let in_norm = n.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        let expect = scalar_prox(in_norm, &pr).value.abs();
        prop_assert!((out_norm - expect).abs() <= 1e-5 * expect.max(1.0));
        // nonzero output is a positive multiple of the input
        if out.iter().any(|&v| v != 0.0) {
            let dot: f64 = out.iter().zip(&n).map(|(&a, &b)| a as f64 * b as f64).sum();
            prop_assert!((dot - out_norm * in_norm).abs() <= 1e-5 * (out_norm * in_norm).max(1.0));
        }
    }
}
