//! Dataset ingestion and seeded synthetic generators.
//!
//! CSV format: one sample per row, first column an integer class label,
//! remaining columns real features.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    n_classes: usize,
    features: Vec<f32>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(dim: usize, n_classes: usize) -> Self {
        Dataset {
            dim,
            n_classes,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, features: &[f32], label: usize) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "sample has {} features, dataset dim is {}",
                features.len(),
                self.dim
            )));
        }
        if label >= self.n_classes {
            return Err(Error::InvalidParam(format!(
                "label {label} >= n_classes {}",
                self.n_classes
            )));
        }
        self.features.extend_from_slice(features);
        self.labels.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn sample(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Deterministic train/test split by seeded permutation.
    pub fn split(&self, train_fraction: f64, seed: u64) -> (Dataset, Dataset) {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        let n_train = ((self.len() as f64) * train_fraction).round() as usize;
        let mut train = Dataset::new(self.dim, self.n_classes);
        let mut test = Dataset::new(self.dim, self.n_classes);
        for (pos, &i) in idx.iter().enumerate() {
            let dst = if pos < n_train { &mut train } else { &mut test };
            dst.push(self.sample(i), self.label(i)).unwrap();
        }
        (train, test)
    }
}

/// Load the documented CSV format. Fails on empty files and reports the
/// line number of any malformed row.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<(usize, Vec<f32>)> = Vec::new();
    let mut dim = None;
    let mut max_label = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label: usize = fields
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|e| Error::Malformed {
                line: lineno,
                msg: format!("bad label: {e}"),
            })?;
        let feats: Vec<f32> = fields
            .map(|f| {
                f.trim().parse::<f32>().map_err(|e| Error::Malformed {
                    line: lineno,
                    msg: format!("bad feature: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(feats.len()),
            Some(d) if d != feats.len() => {
                return Err(Error::Malformed {
                    line: lineno,
                    msg: format!("expected {d} features, got {}", feats.len()),
                })
            }
            _ => {}
        }
        max_label = max_label.max(label);
        rows.push((label, feats));
    }
    let dim = dim.ok_or(Error::Malformed {
        line: 0,
        msg: "empty dataset file".into(),
    })?;
    let mut ds = Dataset::new(dim, max_label + 1);
    for (label, feats) in rows {
        ds.push(&feats, label)?;
    }
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobsSpec {
    pub n_classes: usize,
    pub dim: usize,
    pub n_samples: usize,
    pub center_scale: f64,
    pub noise: f64,
}

impl Default for BlobsSpec {
    fn default() -> Self {
        BlobsSpec {
            n_classes: 4,
            dim: 64,
            n_samples: 2000,
            center_scale: 1.0,
            noise: 0.35,
        }
    }
}

/// Gaussian blobs: one unit-ish center per class, isotropic noise around it.
/// Identical bytes for identical spec and seed.
pub fn synth_blobs(spec: &BlobsSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center_dist = Normal::new(0.0, spec.center_scale).unwrap();
    let noise_dist = Normal::new(0.0, spec.noise).unwrap();
    let centers: Vec<Vec<f64>> = (0..spec.n_classes)
        .map(|_| (0..spec.dim).map(|_| center_dist.sample(&mut rng)).collect())
        .collect();
    let mut ds = Dataset::new(spec.dim, spec.n_classes);
    for i in 0..spec.n_samples {
        let label = i % spec.n_classes;
        let feats: Vec<f32> = centers[label]
            .iter()
            .map(|&c| (c + noise_dist.sample(&mut rng)) as f32)
            .collect();
        ds.push(&feats, label).unwrap();
    }
    ds
}

/// Regression data for the group-sparse support-recovery benchmark:
/// features grouped into `n_groups` blocks of `group_size`, a planted
/// weight vector with a fraction of whole groups exactly zero, and targets
/// `y = x . w* + noise`.
#[derive(Debug, Clone)]
pub struct RegressionData {
    pub n_groups: usize,
    pub group_size: usize,
    pub features: Vec<f32>,
    pub targets: Vec<f32>,
    pub true_weights: Vec<f32>,
    pub true_support: Vec<bool>,
}

impl RegressionData {
    pub fn dim(&self) -> usize {
        self.n_groups * self.group_size
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn sample(&self, i: usize) -> &[f32] {
        let d = self.dim();
        &self.features[i * d..(i + 1) * d]
    }
}

pub fn synth_group_regression(
    n_groups: usize,
    group_size: usize,
    n_samples: usize,
    zero_group_fraction: f64,
    noise: f64,
    seed: u64,
) -> RegressionData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = n_groups * group_size;
    let n_zero = ((n_groups as f64) * zero_group_fraction).round() as usize;
    let mut support = vec![true; n_groups];
    let mut order: Vec<usize> = (0..n_groups).collect();
    order.shuffle(&mut rng);
    for &g in order.iter().take(n_zero) {
        support[g] = false;
    }
    let weight_dist = Normal::new(0.0, 1.0).unwrap();
    let mut true_weights = vec![0.0f32; dim];
    for (g, &active) in support.iter().enumerate() {
        if active {
            for k in 0..group_size {
                // keep planted weights away from zero so support is well defined
                let mut w: f64 = weight_dist.sample(&mut rng);
                if w.abs() < 0.3 {
                    w += 0.5_f64.copysign(w);
                }
                true_weights[g * group_size + k] = w as f32;
            }
        }
    }
    let x_dist = Normal::new(0.0, 1.0).unwrap();
    let noise_dist = Normal::new(0.0, noise).unwrap();
    let mut features = Vec::with_capacity(n_samples * dim);
    let mut targets = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let x: Vec<f32> = (0..dim).map(|_| x_dist.sample(&mut rng) as f32).collect();
        let y: f64 = x
            .iter()
            .zip(&true_weights)
            .map(|(&a, &b)| a as f64 * b as f64)
            .sum::<f64>()
            + noise_dist.sample(&mut rng);
        features.extend_from_slice(&x);
        targets.push(y as f32);
    }
    RegressionData {
        n_groups,
        group_size,
        features,
        targets,
        true_weights,
        true_support: support,
    }
}
