//! The `histogram` subcommand: weight-magnitude distribution of a saved
//! checkpoint, as CSV bin edges + counts.

use std::path::Path;

use goprune_core::checkpoint::load_checkpoint;
use goprune_core::report::weight_histogram;
use goprune_core::Result;

pub fn cmd_histogram(stem: &Path, bins: usize, range_max: Option<f64>, out: &Path) -> Result<()> {
    let layers = load_checkpoint(stem)?;
    let range = range_max.map(|hi| (0.0, hi));
    let hist = weight_histogram(&layers, bins, range)?;
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    hist.write_csv(out)?;
    Ok(())
}
