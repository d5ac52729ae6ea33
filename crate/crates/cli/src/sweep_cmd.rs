//! The `p-sweep` subcommand: rerun the pipeline for several values of the
//! norm exponent p and tabulate the three stage accuracies per value.

use std::io::Write;

use goprune_core::pipeline::run_seed;
use goprune_core::report::{fmt, mean_std};
use goprune_core::{Error, Result};

use crate::config::ResolvedRun;

pub const DEFAULT_P: [f64; 3] = [0.0, 0.5, 2.0 / 3.0];

pub fn cmd_p_sweep(run: &ResolvedRun, p_values: &[f64]) -> Result<()> {
    if p_values.is_empty() {
        return Err(Error::InvalidParam("p-sweep needs at least one p value".into()));
    }
    for (i, &p) in p_values.iter().enumerate() {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParam(format!("p must be in [0,1), got {p}")));
        }
        if p_values[..i].contains(&p) {
            return Err(Error::InvalidParam(format!("duplicate p value {p}")));
        }
    }

    std::fs::create_dir_all(&run.out)?;
    let mut f = std::fs::File::create(run.out.join("p_sweep.csv"))?;
    writeln!(f, "p,compressed_acc,pruned_acc,finetuned_acc")?;
    for &p in p_values {
        let mut cfg = run.cfg.clone();
        cfg.hp.p = p;
        cfg.validate()?;
        let mut compressed = Vec::new();
        let mut pruned = Vec::new();
        let mut finetuned = Vec::new();
        for &seed in &run.seeds {
            let o = run_seed(&cfg, &run.train, &run.test, seed)?;
            compressed.push(o.compressed_acc);
            pruned.push(o.pruned_acc);
            finetuned.push(o.finetuned_acc);
        }
        writeln!(
            f,
            "{},{},{},{}",
            fmt(p),
            fmt(mean_std(&compressed).0),
            fmt(mean_std(&pruned).0),
            fmt(mean_std(&finetuned).0)
        )?;
    }
    Ok(())
}
