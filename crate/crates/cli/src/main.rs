use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use goprune_cli::config::{self, Overrides, OUT_ENV};
use goprune_cli::{failure_exit_code, histogram_cmd, pipeline_cmd, proxcheck_cmd, sweep_cmd};
use goprune_core::{Error, Result};

/// Structured pruning with l2p-norm group regularization: train, compress,
/// prune, fine-tune, and report.
#[derive(Parser)]
#[command(name = "goprune", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full train/compress/prune/fine-tune pipeline over all seeds
    Pipeline(PipelineArgs),
    /// Weight-magnitude histogram of a saved checkpoint
    Histogram(HistogramArgs),
    /// Rerun the pipeline across several p values
    #[command(name = "p-sweep")]
    PSweep(SweepArgs),
    /// Verify the proximal operator against a brute-force grid oracle
    ProxCheck(ProxCheckArgs),
}

#[derive(Args)]
struct CommonOverrides {
    /// Config file (sectioned key-value)
    #[arg(long)]
    config: PathBuf,
    /// Compression method: goprune | admm
    #[arg(long)]
    method: Option<String>,
    /// Norm exponent p in [0,1)
    #[arg(long)]
    p: Option<f64>,
    /// Regularization weight
    #[arg(long)]
    lambda: Option<f64>,
    /// Fraction of channels removed per prunable layer
    #[arg(long)]
    ratio: Option<f64>,
    /// Comma-separated seed list
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory (overrides GOPRUNE_OUT and the config file)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    common: CommonOverrides,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonOverrides,
    /// Comma-separated p values (overrides the single-p meaning of --p)
    #[arg(long, name = "p-values")]
    p_values: Option<String>,
}

#[derive(Args)]
struct HistogramArgs {
    /// Checkpoint stem (reads <stem>.manifest and <stem>.blob)
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Upper magnitude bound; defaults to max |w|
    #[arg(long)]
    range_max: Option<f64>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProxCheckArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Test hook: perturb the sparsity threshold by 1% to prove the oracle
    /// catches it
    #[arg(long, hide = true)]
    inject_kappa_fault: bool,
}

fn resolve_common(c: &CommonOverrides) -> Result<config::ResolvedRun> {
    let seeds = c.seeds.as_deref().map(config::parse_seed_list).transpose()?;
    let ov = Overrides {
        method: c.method.clone(),
        p: c.p,
        lambda: c.lambda,
        ratio: c.ratio,
        seeds,
        out: c.out.clone(),
    };
    if let Some(p) = ov.p {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParam(format!("--p must be in [0,1), got {p}")));
        }
    }
    let file = config::parse_file(&c.config)?;
    config::resolve(&file, &ov)
}

/// Default output location for single-file commands: --out, else
/// GOPRUNE_OUT/<name>, else ./<name>.
fn out_file(flag: Option<PathBuf>, name: &str) -> PathBuf {
    flag.unwrap_or_else(|| match std::env::var_os(OUT_ENV) {
        Some(dir) => PathBuf::from(dir).join(name),
        None => PathBuf::from(name),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Pipeline(args) => {
            let run = resolve_common(&args.common)?;
            let summary = pipeline_cmd::cmd_pipeline(&run)?;
            println!(
                "pipeline: {} seed(s) ok, {} failed; fine-tuned accuracy {:.4} ± {:.4}",
                summary.n_ok,
                summary.failures.len(),
                summary.finetuned_mean,
                summary.finetuned_std
            );
            for (seed, msg) in &summary.failures {
                eprintln!("seed {seed} failed: {msg}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Histogram(args) => {
            let out = out_file(args.out, "histogram.csv");
            histogram_cmd::cmd_histogram(&args.checkpoint, args.bins, args.range_max, &out)?;
            println!("histogram written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::PSweep(args) => {
            let run = resolve_common(&args.common)?;
            let p_values = match &args.p_values {
                Some(list) => config::parse_p_list(list)?,
                None => match args.common.p {
                    Some(p) => vec![p],
                    None => sweep_cmd::DEFAULT_P.to_vec(),
                },
            };
            sweep_cmd::cmd_p_sweep(&run, &p_values)?;
            println!("p-sweep written to {}", run.out.join("p_sweep.csv").display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ProxCheck(args) => {
            let out = out_file(args.out, "prox_check.csv");
            let report =
                proxcheck_cmd::cmd_prox_check(args.samples, args.seed, &out, args.inject_kappa_fault)?;
            println!(
                "prox-check: {} samples, worst gap {:.3e}, {} over tolerance",
                report.samples, report.worst_gap, report.failures
            );
            if report.failures > 0 {
                eprintln!("prox-check failed: objective gap exceeds {:.0e}", proxcheck_cmd::GAP_TOL);
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit codes don't match ours: usage problems are 1
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(failure_exit_code(&err))
        }
    }
}
