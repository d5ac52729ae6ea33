//! Run configuration: a sectioned key-value file plus command-line
//! overrides. Flags win over the environment; the environment wins over the
//! file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use goprune_core::data::{load_csv, synth_blobs, BlobsSpec, Dataset};
use goprune_core::model::Arch;
use goprune_core::pipeline::{Method, PipelineConfig};
use goprune_core::{Error, HyperParams, Result};

/// Output-directory override honored when `--out` is absent.
pub const OUT_ENV: &str = "GOPRUNE_OUT";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: ModelSection,
    pub data: DataSection,
    pub run: RunSection,
    #[serde(default)]
    pub hyper: HyperSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// softmax | mlp | cnn
    pub arch: String,
    pub n_classes: usize,
    /// input dimension for softmax/mlp
    pub dim: Option<usize>,
    /// hidden width for mlp
    pub hidden: Option<usize>,
    /// input image side and conv widths for cnn
    pub side: Option<usize>,
    pub c1: Option<usize>,
    pub c2: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// blobs | csv
    pub source: String,
    pub path: Option<String>,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default = "default_center_scale")]
    pub center_scale: f64,
    #[serde(default = "default_split")]
    pub train_fraction: f64,
    #[serde(default)]
    pub data_seed: u64,
    #[serde(default = "default_split_seed")]
    pub split_seed: u64,
}

fn default_n_samples() -> usize {
    2000
}
fn default_noise() -> f64 {
    0.35
}
fn default_center_scale() -> f64 {
    1.0
}
fn default_split() -> f64 {
    0.8
}
fn default_split_seed() -> u64 {
    17
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// goprune | admm
    pub method: String,
    pub seeds: Vec<u64>,
    pub out: String,
    pub train_epochs: usize,
    #[serde(default = "default_eta")]
    pub train_eta: f64,
    pub prune_ratio: f64,
    pub finetune_epochs: usize,
    #[serde(default = "default_eta")]
    pub finetune_eta: f64,
    #[serde(default)]
    pub score_on_u: bool,
}

fn default_eta() -> f64 {
    0.05
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperSection {
    pub p: f64,
    pub lambda: f64,
    pub beta: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub alpha: f64,
    pub eta: f64,
    pub outer_epochs: usize,
    pub batch_size: usize,
}

impl Default for HyperSection {
    fn default() -> Self {
        let h = HyperParams::default();
        HyperSection {
            p: h.p,
            lambda: h.lambda,
            beta: h.beta,
            rho1: h.rho1,
            rho2: h.rho2,
            alpha: h.alpha,
            eta: h.eta,
            outer_epochs: h.outer_epochs,
            batch_size: h.batch_size,
        }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub method: Option<String>,
    pub p: Option<f64>,
    pub lambda: Option<f64>,
    pub ratio: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
}

/// Fully resolved run: solver configuration, datasets, seeds, output dir.
pub struct ResolvedRun {
    pub cfg: PipelineConfig,
    pub train: Dataset,
    pub test: Dataset,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

pub fn parse_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParam(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::InvalidParam(format!("config parse error: {e}")))
}

fn build_arch(m: &ModelSection) -> Result<Arch> {
    let need = |v: Option<usize>, field: &str| {
        v.ok_or_else(|| Error::InvalidParam(format!("model.{field} required for arch {}", m.arch)))
    };
    match m.arch.as_str() {
        "softmax" => Ok(Arch::Softmax { dim: need(m.dim, "dim")?, n_classes: m.n_classes }),
        "mlp" => Ok(Arch::Mlp {
            dim: need(m.dim, "dim")?,
            hidden: need(m.hidden, "hidden")?,
            n_classes: m.n_classes,
        }),
        "cnn" => Ok(Arch::Cnn {
            side: need(m.side, "side")?,
            c1: need(m.c1, "c1")?,
            c2: need(m.c2, "c2")?,
            n_classes: m.n_classes,
        }),
        other => Err(Error::InvalidParam(format!(
            "model.arch must be softmax, mlp, or cnn, got {other:?}"
        ))),
    }
}

fn build_data(d: &DataSection, arch: &Arch) -> Result<(Dataset, Dataset)> {
    let full = match d.source.as_str() {
        "blobs" => {
            let spec = BlobsSpec {
                n_classes: arch.n_classes(),
                dim: arch.input_dim(),
                n_samples: d.n_samples,
                center_scale: d.center_scale,
                noise: d.noise,
            };
            synth_blobs(&spec, d.data_seed)
        }
        "csv" => {
            let path = d
                .path
                .as_ref()
                .ok_or_else(|| Error::InvalidParam("data.path required for source csv".into()))?;
            load_csv(Path::new(path))?
        }
        other => {
            return Err(Error::InvalidParam(format!(
                "data.source must be blobs or csv, got {other:?}"
            )))
        }
    };
    if !(0.0 < d.train_fraction && d.train_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "data.train_fraction must be in (0,1), got {}",
            d.train_fraction
        )));
    }
    Ok(full.split(d.train_fraction, d.split_seed))
}

pub fn resolve(file: &FileConfig, ov: &Overrides) -> Result<ResolvedRun> {
    let arch = build_arch(&file.model)?;
    let (train, test) = build_data(&file.data, &arch)?;

    let h = &file.hyper;
    let hp = HyperParams {
        p: ov.p.unwrap_or(h.p),
        lambda: ov.lambda.unwrap_or(h.lambda),
        beta: h.beta,
        rho1: h.rho1,
        rho2: h.rho2,
        alpha: h.alpha,
        eta: h.eta,
        outer_epochs: h.outer_epochs,
        batch_size: h.batch_size,
        seed: 0,
    };

    let method = Method::parse(ov.method.as_deref().unwrap_or(&file.run.method))?;
    let cfg = PipelineConfig {
        arch,
        method,
        hp,
        train_epochs: file.run.train_epochs,
        train_eta: file.run.train_eta,
        prune_ratio: ov.ratio.unwrap_or(file.run.prune_ratio),
        finetune_epochs: file.run.finetune_epochs,
        finetune_eta: file.run.finetune_eta,
        score_on_u: file.run.score_on_u,
    };
    cfg.validate()?;

    let seeds = ov.seeds.clone().unwrap_or_else(|| file.run.seeds.clone());
    if seeds.is_empty() {
        return Err(Error::InvalidParam("run.seeds must not be empty".into()));
    }

    let out = match (&ov.out, std::env::var_os(OUT_ENV)) {
        (Some(flag), _) => flag.clone(),
        (None, Some(env)) => PathBuf::from(env),
        (None, None) => PathBuf::from(&file.run.out),
    };

    Ok(ResolvedRun { cfg, train, test, seeds, out })
}

pub fn parse_seed_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidParam(format!("bad seed {tok:?}: {e}")))
        })
        .collect()
}

pub fn parse_p_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParam(format!("bad p value {tok:?}: {e}")))
        })
        .collect()
}
