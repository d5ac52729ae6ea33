//! The end-to-end experiment per seed: train a dense model, compress it
//! with PAM (or the ADMM baseline), one-shot prune, fine-tune, and collect
//! stage accuracies, timings, and sparsity statistics.

use std::time::Instant;

use crate::admm::{run_admm, AdmmOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{evaluate_accuracy, Arch, ClassifierObjective, TinyModel};
use crate::pam::{run_pam, HyperParams, TraceRow, WSolver};
use crate::prune::{apply_mask, build_mask, finetune, importance_scores, prunable_layer_names, ChannelImportance, PruneMask};
use crate::tensor::LayerSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GoPrune,
    Admm,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "goprune" => Ok(Method::GoPrune),
            "admm" => Ok(Method::Admm),
            other => Err(Error::InvalidParam(format!(
                "unknown method {other:?} (expected goprune or admm)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::GoPrune => "goprune",
            Method::Admm => "admm",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub arch: Arch,
    pub method: Method,
    pub hp: HyperParams,
    pub train_epochs: usize,
    pub train_eta: f64,
    pub prune_ratio: f64,
    pub finetune_epochs: usize,
    pub finetune_eta: f64,
    /// score channel importance on U instead of W after compression
    pub score_on_u: bool,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.hp.validate()?;
        if self.method == Method::Admm && !(self.hp.p > 0.0 && self.hp.p < 1.0) {
            return Err(Error::InvalidParam(format!(
                "method admm requires p in (0,1), got p={}",
                self.hp.p
            )));
        }
        if !(0.0..1.0).contains(&self.prune_ratio) || self.prune_ratio == 0.0 {
            return Err(Error::InvalidParam(format!(
                "prune ratio must be in (0,1), got {}",
                self.prune_ratio
            )));
        }
        Ok(())
    }
}

/// Everything one seed produces. Wall-clock fields are the only
/// non-deterministic values; report writers keep them out of the
/// deterministic artifacts.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub baseline_acc: f64,
    pub compressed_acc: f64,
    pub pruned_acc: f64,
    pub finetuned_acc: f64,
    pub zero_channel_fraction: f64,
    pub trace: Vec<TraceRow>,
    pub train_time_s: f64,
    pub compress_time_s: f64,
    pub prune_time_s: f64,
    pub finetune_time_s: f64,
    pub baseline: TinyModel,
    pub compressed_w: LayerSet,
    pub compressed_u: LayerSet,
    pub mask: PruneMask,
    pub final_model: TinyModel,
}

fn prunable_scores(arch: &Arch, weights: &LayerSet) -> Result<ChannelImportance> {
    let names = prunable_layer_names(arch);
    let all = importance_scores(weights)?;
    Ok(ChannelImportance {
        layers: all
            .layers
            .into_iter()
            .filter(|(n, _)| names.contains(&n.as_str()))
            .collect(),
    })
}

pub fn run_seed(cfg: &PipelineConfig, train: &Dataset, test: &Dataset, seed: u64) -> Result<SeedOutcome> {
    cfg.validate()?;

    // stage 1: dense training
    let t0 = Instant::now();
    let init = TinyModel::init_random(cfg.arch, seed)?;
    let (baseline, _) = finetune(
        &init,
        train,
        test,
        cfg.train_epochs,
        cfg.train_eta,
        cfg.hp.alpha,
        cfg.hp.batch_size,
        seed ^ 0x7261_696e, // distinct shuffle stream per stage
    )?;
    let train_time_s = t0.elapsed().as_secs_f64();
    let baseline_acc = evaluate_accuracy(&baseline, test)?;

    // stage 2: compression (the timed phase; excludes evaluation)
    let mut hp = cfg.hp;
    hp.seed = seed;
    let obj = ClassifierObjective::new(cfg.arch, train, hp.alpha)?;
    let t1 = Instant::now();
    let (w, u, trace) = match cfg.method {
        Method::GoPrune => {
            let (state, trace) = run_pam(&obj, &baseline.params, &hp, WSolver::Sgd)?;
            (state.w, state.u, trace)
        }
        Method::Admm => {
            let (state, trace) = run_admm(&obj, &baseline.params, &hp, &AdmmOptions::default())?;
            (state.w, state.u, trace)
        }
    };
    let compress_time_s = t1.elapsed().as_secs_f64();
    let compressed_model = TinyModel { arch: cfg.arch, params: w.clone() };
    let compressed_acc = evaluate_accuracy(&compressed_model, test)?;
    let zero_channel_fraction = u.zero_channel_fraction();

    // stage 3: one-shot channel pruning
    let t2 = Instant::now();
    let score_src = if cfg.score_on_u { &u } else { &w };
    let scores = prunable_scores(&cfg.arch, score_src)?;
    let mask = build_mask(&scores, cfg.prune_ratio)?;
    let pruned = apply_mask(&compressed_model, &mask)?;
    let prune_time_s = t2.elapsed().as_secs_f64();
    let pruned_acc = evaluate_accuracy(&pruned, test)?;

    // stage 4: fine-tuning the smaller architecture
    let t3 = Instant::now();
    let (final_model, _) = finetune(
        &pruned,
        train,
        test,
        cfg.finetune_epochs,
        cfg.finetune_eta,
        cfg.hp.alpha,
        cfg.hp.batch_size,
        seed ^ 0x6669_6e65,
    )?;
    let finetune_time_s = t3.elapsed().as_secs_f64();
    let finetuned_acc = evaluate_accuracy(&final_model, test)?;

    Ok(SeedOutcome {
        seed,
        baseline_acc,
        compressed_acc,
        pruned_acc,
        finetuned_acc,
        zero_channel_fraction,
        trace,
        train_time_s,
        compress_time_s,
        prune_time_s,
        finetune_time_s,
        baseline,
        compressed_w: w,
        compressed_u: u,
        mask,
        final_model,
    })
}
