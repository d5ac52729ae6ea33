//! The `pipeline` subcommand: run every seed through train → compress →
//! prune → fine-tune, then write reports and checkpoints.
//!
//! Deterministic artifacts (report.csv, manifest.json, checkpoints, masks,
//! traces, histograms) never contain wall-clock values; timings.csv is the
//! only file that does, so rerunning a config reproduces everything else
//! byte for byte.

use std::io::Write;
use std::path::Path;

use goprune_core::checkpoint::save_checkpoint;
use goprune_core::pipeline::{run_seed, SeedOutcome};
use goprune_core::report::{fmt, mean_std, median, weight_histogram};
use goprune_core::{Error, Result};

use crate::config::ResolvedRun;

pub struct PipelineSummary {
    pub n_ok: usize,
    pub failures: Vec<(u64, String)>,
    pub finetuned_mean: f64,
    pub finetuned_std: f64,
}

pub fn cmd_pipeline(run: &ResolvedRun) -> Result<PipelineSummary> {
    std::fs::create_dir_all(&run.out)?;

    // seeds are independent; run them in parallel worker threads and
    // aggregate single-threaded afterwards
    let results: Vec<(u64, Result<SeedOutcome>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = run
            .seeds
            .iter()
            .map(|&seed| {
                scope.spawn(move || (seed, run_seed(&run.cfg, &run.train, &run.test, seed)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("seed worker panicked")).collect()
    });

    let mut ok: Vec<&SeedOutcome> = Vec::new();
    let mut failures: Vec<(u64, String)> = Vec::new();
    for (seed, res) in &results {
        match res {
            Ok(out) => ok.push(out),
            Err(e) => failures.push((*seed, e.to_string())),
        }
    }

    for out in &ok {
        write_seed_artifacts(&run.out, out)?;
    }
    write_report(&run.out, run, &ok)?;
    write_timings(&run.out, &ok)?;
    write_manifest(&run.out, run, &ok, &failures)?;

    if ok.is_empty() {
        let (seed, msg) = &failures[0];
        return Err(Error::NonFinite(format!("every seed failed; seed {seed}: {msg}")));
    }
    let (fm, fs) = mean_std(&ok.iter().map(|o| o.finetuned_acc).collect::<Vec<_>>());
    Ok(PipelineSummary { n_ok: ok.len(), failures, finetuned_mean: fm, finetuned_std: fs })
}

fn write_seed_artifacts(dir: &Path, out: &SeedOutcome) -> Result<()> {
    let s = out.seed;
    save_checkpoint(&dir.join(format!("seed{s}_baseline")), &out.baseline.params)?;
    save_checkpoint(&dir.join(format!("seed{s}_w")), &out.compressed_w)?;
    save_checkpoint(&dir.join(format!("seed{s}_u")), &out.compressed_u)?;
    save_checkpoint(&dir.join(format!("seed{s}_final")), &out.final_model.params)?;
    std::fs::write(dir.join(format!("seed{s}_mask.txt")), out.mask.to_text())?;

    // near-zero mass is read off the sparse block U
    let hist = weight_histogram(&out.compressed_u, 100, None)?;
    hist.write_csv(&dir.join(format!("seed{s}_hist_u.csv")))?;

    // objective trace without the wall-clock columns
    let mut f = std::fs::File::create(dir.join(format!("seed{s}_trace.csv")))?;
    writeln!(f, "iteration,objective,zero_channel_fraction")?;
    for r in &out.trace {
        writeln!(f, "{},{},{}", r.iteration, fmt(r.objective), fmt(r.zero_channel_fraction))?;
    }
    Ok(())
}

fn write_report(dir: &Path, run: &ResolvedRun, ok: &[&SeedOutcome]) -> Result<()> {
    let mut f = std::fs::File::create(dir.join("report.csv"))?;
    writeln!(
        f,
        "seed,method,p,lambda,ratio,baseline_acc,compressed_acc,pruned_acc,finetuned_acc,zero_channel_fraction"
    )?;
    let row = |label: &str, cols: &[f64]| -> String {
        let mut line = format!(
            "{label},{},{},{},{}",
            run.cfg.method.name(),
            fmt(run.cfg.hp.p),
            fmt(run.cfg.hp.lambda),
            fmt(run.cfg.prune_ratio)
        );
        for c in cols {
            line.push(',');
            line.push_str(&fmt(*c));
        }
        line
    };
    for o in ok {
        writeln!(
            f,
            "{}",
            row(
                &o.seed.to_string(),
                &[o.baseline_acc, o.compressed_acc, o.pruned_acc, o.finetuned_acc, o.zero_channel_fraction]
            )
        )?;
    }
    if !ok.is_empty() {
        let col = |g: fn(&SeedOutcome) -> f64| ok.iter().map(|o| g(o)).collect::<Vec<_>>();
        let stats: Vec<(f64, f64)> = [
            col(|o| o.baseline_acc),
            col(|o| o.compressed_acc),
            col(|o| o.pruned_acc),
            col(|o| o.finetuned_acc),
            col(|o| o.zero_channel_fraction),
        ]
        .iter()
        .map(|v| mean_std(v))
        .collect();
        let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
        let stds: Vec<f64> = stats.iter().map(|s| s.1).collect();
        writeln!(f, "{}", row("mean", &means))?;
        writeln!(f, "{}", row("std", &stds))?;
    }
    Ok(())
}

fn write_timings(dir: &Path, ok: &[&SeedOutcome]) -> Result<()> {
    let mut f = std::fs::File::create(dir.join("timings.csv"))?;
    writeln!(f, "seed,train_s,compress_s,prune_s,finetune_s")?;
    for o in ok {
        writeln!(
            f,
            "{},{:.6},{:.6},{:.6},{:.6}",
            o.seed, o.train_time_s, o.compress_time_s, o.prune_time_s, o.finetune_time_s
        )?;
    }
    if !ok.is_empty() {
        for (label, stat) in [("mean", 0), ("median", 1)] {
            let agg = |g: fn(&SeedOutcome) -> f64| {
                let v: Vec<f64> = ok.iter().map(|o| g(o)).collect();
                if stat == 0 {
                    mean_std(&v).0
                } else {
                    median(&v)
                }
            };
            writeln!(
                f,
                "{label},{:.6},{:.6},{:.6},{:.6}",
                agg(|o| o.train_time_s),
                agg(|o| o.compress_time_s),
                agg(|o| o.prune_time_s),
                agg(|o| o.finetune_time_s)
            )?;
        }
    }
    Ok(())
}

fn write_manifest(
    dir: &Path,
    run: &ResolvedRun,
    ok: &[&SeedOutcome],
    failures: &[(u64, String)],
) -> Result<()> {
    let seeds: Vec<serde_json::Value> = run
        .seeds
        .iter()
        .map(|&s| {
            if let Some(o) = ok.iter().find(|o| o.seed == s) {
                serde_json::json!({
                    "seed": s,
                    "status": "ok",
                    "artifacts": [
                        format!("seed{s}_baseline"),
                        format!("seed{s}_w"),
                        format!("seed{s}_u"),
                        format!("seed{s}_final"),
                        format!("seed{s}_mask.txt"),
                        format!("seed{s}_trace.csv"),
                        format!("seed{s}_hist_u.csv"),
                    ],
                    "finetuned_acc": o.finetuned_acc,
                })
            } else {
                let msg = failures.iter().find(|(f, _)| *f == s).map(|(_, m)| m.as_str());
                serde_json::json!({ "seed": s, "status": "error", "error": msg })
            }
        })
        .collect();
    let manifest = serde_json::json!({
        "method": run.cfg.method.name(),
        "p": run.cfg.hp.p,
        "lambda": run.cfg.hp.lambda,
        "prune_ratio": run.cfg.prune_ratio,
        "outer_epochs": run.cfg.hp.outer_epochs,
        "train_epochs": run.cfg.train_epochs,
        "finetune_epochs": run.cfg.finetune_epochs,
        "reports": ["report.csv", "timings.csv"],
        "seeds": seeds,
    });
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap())?;
    Ok(())
}
