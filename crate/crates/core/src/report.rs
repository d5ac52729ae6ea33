//! Report building blocks: weight-magnitude histograms, summary statistics,
//! and the CSV schemas shared by the PAM and ADMM drivers.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pam::TraceRow;
use crate::tensor::LayerSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// bin edges, length bins + 1
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Histogram of weight magnitudes. Default range is `[0, max |w|]`; the
/// maximum lands in the last bin, so counts always sum to the parameter
/// count.
pub fn weight_histogram(weights: &LayerSet, bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParam("bins must be >= 1".into()));
    }
    let mags: Vec<f64> = weights
        .iter()
        .flat_map(|(_, t)| t.data())
        .map(|&v| v.abs() as f64)
        .collect();
    let (lo, hi) = match range {
        Some((lo, hi)) if hi > lo => (lo, hi),
        Some((lo, hi)) => {
            return Err(Error::InvalidParam(format!("bad histogram range [{lo}, {hi}]")))
        }
        None => {
            let max = mags.iter().cloned().fold(0.0f64, f64::max);
            (0.0, if max > 0.0 { max } else { 1.0 })
        }
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &m in &mags {
        let idx = (((m - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    Ok(Histogram { edges, counts })
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fraction of weights in the first (near-zero) bin.
    pub fn first_bin_mass(&self) -> f64 {
        self.counts[0] as f64 / self.total().max(1) as f64
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "bin_lo,bin_hi,count")?;
        for (i, &c) in self.counts.iter().enumerate() {
            writeln!(f, "{},{},{}", fmt(self.edges[i]), fmt(self.edges[i + 1]), c)?;
        }
        Ok(())
    }
}

/// Mean and (population) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Stable decimal formatting for report files (no locale, no exponent
/// wobble): enough digits to round-trip f64.
pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Objective trace CSV: wall-clock columns belong here, not in the
/// deterministic report files.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "iteration,objective,w_time_ms,u_time_ms,zero_channel_fraction")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{:.3},{:.3},{}",
            r.iteration,
            fmt(r.objective),
            r.w_time_ms,
            r.u_time_ms,
            fmt(r.zero_channel_fraction)
        )?;
    }
    Ok(())
}
