use std::path::{Path, PathBuf};

use anyhow::Context;

use orbitact_core::config::RunConfig;
use orbitact_core::verify::{run_ledger as sweep, LedgerReport, LedgerShape};

use crate::{output_dir, write_text, EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Debug)]
pub struct LedgerOutcome {
    pub report: LedgerReport,
    pub report_path: PathBuf,
    pub exit_code: i32,
}

/// Runs the inequality ledger for the config's potential and loop shape and
/// writes `ledger.json` next to the config's orbit output. `seed` defaults to
/// the config's solver seed.
pub fn run_ledger(config_path: &Path, n_samples: usize, seed: Option<u64>) -> anyhow::Result<LedgerOutcome> {
    let config = RunConfig::load(config_path)?;
    let shape = LedgerShape {
        dim: config.problem.dim,
        harmonics: config.discretization.harmonics,
        n_t: config.n_t(),
    };
    let report = sweep(&config.spec()?, shape, n_samples, seed.unwrap_or(config.solver.seed))?;
    let dir = output_dir(config_path, &config.output.directory);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let report_path = dir.join("ledger.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_text(&report_path, &text)?;
    let exit_code = if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(LedgerOutcome {
        report,
        report_path,
        exit_code,
    })
}
