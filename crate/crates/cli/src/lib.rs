//! Command implementations behind the `goprune` binary. Kept as a library
//! so integration tests can drive the commands directly.

pub mod config;
pub mod histogram_cmd;
pub mod pipeline_cmd;
pub mod proxcheck_cmd;
pub mod sweep_cmd;

use goprune_core::Error;

/// Process exit code for a failure: 1 for usage/configuration problems,
/// 2 for numerical failures.
pub fn failure_exit_code(err: &Error) -> u8 {
    match err {
        Error::NonFinite(_) => 2,
        _ => 1,
    }
}
