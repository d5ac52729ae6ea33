//! Finite-difference gradient checks for every built-in architecture.

mod common;

use common::finite_diff_max_rel_err;
use goprune_core::data::{synth_blobs, synth_group_regression, BlobsSpec};
use goprune_core::model::{Arch, ClassifierObjective, RegressionObjective, TinyModel};

const REL_TOL: f64 = 1e-3;

fn check_arch(arch: Arch, dim: usize, n_classes: usize, seed: u64) -> f64 {
    let spec = BlobsSpec { n_classes, dim, n_samples: 24, ..BlobsSpec::default() };
    let data = synth_blobs(&spec, seed);
    let obj = ClassifierObjective::new(arch, &data, 1e-4).unwrap();
    let model = TinyModel::init_random(arch, seed).unwrap();
    let idx: Vec<usize> = (0..data.len()).collect();
    finite_diff_max_rel_err(&obj, &model.params, &idx)
}

#[test]
fn softmax_gradient_matches_finite_differences() {
    let err = check_arch(Arch::Softmax { dim: 10, n_classes: 4 }, 10, 4, 3);
    assert!(err < REL_TOL, "max rel err {err}");
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let err = check_arch(Arch::Mlp { dim: 8, hidden: 6, n_classes: 3 }, 8, 3, 5);
    assert!(err < REL_TOL, "max rel err {err}");
}

#[test]
fn cnn_gradient_matches_finite_differences() {
    // seeds pinned to points where no ReLU pre-activation sits within the
    // finite-difference step of zero; at a kink the central difference
    // measures a subgradient average, not the one-sided derivative we use
    let arch = Arch::Cnn { side: 8, c1: 3, c2: 4, n_classes: 3 };
    for seed in [0, 1, 2, 3, 4] {
        let err = check_arch(arch, 64, 3, seed);
        assert!(err < REL_TOL, "seed {seed}: max rel err {err}");
    }
}

#[test]
fn regression_gradient_matches_finite_differences() {
    let data = synth_group_regression(6, 4, 32, 0.5, 0.05, 9);
    let obj = RegressionObjective { data: &data, alpha: 1e-4 };
    let mut w = obj.init_weights();
    for v in w.tensor_mut(0).data_mut() {
        *v = 0.1;
    }
    let idx: Vec<usize> = (0..32).collect();
    let err = finite_diff_max_rel_err(&obj, &w, &idx);
    assert!(err < REL_TOL, "max rel err {err}");
}
