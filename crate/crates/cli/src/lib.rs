//! Batch driver behind the `orbitact` binary.
//!
//! Each subcommand is a plain function returning what it wrote and the exit
//! code the process should report, so the same paths are exercised by the
//! binary and by the test suites.

use std::path::{Path, PathBuf};

use orbitact_core::OrbitError;

mod export;
mod ledger;
mod solve;

pub use export::{export_trajectory, ExportOutcome};
pub use ledger::{run_ledger, LedgerOutcome};
pub use solve::{run_solve, CoercivityCheck, SolveOutcome, SolveSummary, StartSummary};

pub const EXIT_OK: i32 = 0;
/// A ledger check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Invalid config or orbit file.
pub const EXIT_INVALID_INPUT: i32 = 2;
/// No start produced a catalogued orbit.
pub const EXIT_NO_CONVERGENCE: i32 = 3;
/// I/O or any other runtime failure.
pub const EXIT_RUNTIME: i32 = 4;

/// Environment variable capping worker threads; `0` or unset means automatic.
pub const THREADS_ENV: &str = "ORBITACT_THREADS";

pub fn threads_from_env() -> anyhow::Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(0),
    }
}

/// Exit code for an error bubbling out of a subcommand.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<OrbitError>() {
        Some(OrbitError::ConfigInvalid(_) | OrbitError::OrbitFileInvalid(_)) => EXIT_INVALID_INPUT,
        _ => EXIT_RUNTIME,
    }
}

/// Output directory of a config: relative paths hang off the config's own
/// directory so a run does not depend on where it was launched from.
pub(crate) fn output_dir(config_path: &Path, directory: &str) -> PathBuf {
    let dir = Path::new(directory);
    if dir.is_absolute() {
        return dir.to_path_buf();
    }
    config_path
        .parent()
        .map(|p| p.join(dir))
        .unwrap_or_else(|| dir.to_path_buf())
}

pub(crate) fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))
}
