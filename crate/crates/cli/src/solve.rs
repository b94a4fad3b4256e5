use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use orbitact_core::config::RunConfig;
use orbitact_core::orbit_file::{OrbitFile, TOOL_VERSION};
use orbitact_core::solver::{multistart, MultistartResult, SolveStatus};
use orbitact_core::verify::coercivity_bound;

use crate::{output_dir, write_text, EXIT_NO_CONVERGENCE, EXIT_OK};

/// Per-start line of the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub class: i64,
    pub start: usize,
    pub seed_radius: f64,
    /// `Converged`, `MaxIters`, ... or `error: <message>` for starts that
    /// could not run at all.
    pub status: String,
    pub action: Option<f64>,
    pub grad_norm: Option<f64>,
    pub el_residual: Option<f64>,
    pub iterations: Option<usize>,
}

/// Kinetic energy of every recorded iterate at or below the top critical
/// value `level`, compared against the a-priori bound for that level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityCheck {
    pub level: Option<f64>,
    pub bound: Option<f64>,
    pub c: Option<f64>,
    pub b: Option<f64>,
    pub iterates_checked: usize,
    pub max_kinetic: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub tool_version: String,
    pub config: RunConfig,
    pub starts: usize,
    pub converged: usize,
    pub dropped: usize,
    pub records: usize,
    /// Ascending.
    pub critical_values: Vec<f64>,
    pub orbit_files: Vec<String>,
    pub coercivity: CoercivityCheck,
    pub start_details: Vec<StartSummary>,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub summary: SolveSummary,
    pub summary_path: PathBuf,
    pub orbit_paths: Vec<PathBuf>,
    pub exit_code: i32,
}

fn coercivity_check(config: &RunConfig, result: &MultistartResult) -> anyhow::Result<CoercivityCheck> {
    let Some(level) = result.critical_values().into_iter().reduce(f64::max) else {
        return Ok(CoercivityCheck {
            level: None,
            bound: None,
            c: None,
            b: None,
            iterates_checked: 0,
            max_kinetic: None,
            passed: true,
        });
    };
    let cb = coercivity_bound(&config.spec()?, level)?;
    let mut checked = 0;
    let mut max_kinetic = f64::NEG_INFINITY;
    for o in &result.outcomes {
        if let Ok(rep) = &o.report {
            for e in rep.ps_trace.iter().filter(|e| e.action <= level) {
                checked += 1;
                max_kinetic = max_kinetic.max(e.kinetic);
            }
        }
    }
    Ok(CoercivityCheck {
        level: Some(level),
        bound: Some(cb.a),
        c: Some(cb.c),
        b: Some(cb.b),
        iterates_checked: checked,
        max_kinetic: (checked > 0).then_some(max_kinetic),
        passed: checked == 0 || max_kinetic <= cb.a,
    })
}

fn start_summary(o: &orbitact_core::solver::StartOutcome) -> StartSummary {
    match &o.report {
        Ok(r) => StartSummary {
            class: o.class,
            start: o.start,
            seed_radius: o.seed_radius,
            status: format!("{:?}", r.status),
            action: Some(r.action_value),
            grad_norm: Some(r.grad_norm),
            el_residual: o.el_residual,
            iterations: Some(r.iterations),
        },
        Err(e) => StartSummary {
            class: o.class,
            start: o.start,
            seed_radius: o.seed_radius,
            status: format!("error: {e}"),
            action: None,
            grad_norm: None,
            el_residual: None,
            iterations: None,
        },
    }
}

/// Loads `config_path`, runs the multistart search and writes one orbit file
/// per catalogued critical point plus `summary.json`.
pub fn run_solve(config_path: &Path, threads: usize) -> anyhow::Result<SolveOutcome> {
    let config = RunConfig::load(config_path)?;
    let spec = config.spec()?;
    let result = multistart(
        &spec,
        &config.solver.winding_classes,
        config.solver.starts_per_class,
        &config.solve_options(),
        &config.multistart_options(threads),
    )?;

    let dir = output_dir(config_path, &config.output.directory);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut orbit_paths = Vec::new();
    let mut orbit_files = Vec::new();
    for (idx, rec) in result.records.iter().enumerate() {
        let name = format!("orbit_{idx:03}_w{}.json", rec.winding_seed_class);
        let path = dir.join(&name);
        write_text(&path, &OrbitFile::from_record(&config, rec).to_json_string())?;
        orbit_paths.push(path);
        orbit_files.push(name);
    }

    let converged = result
        .outcomes
        .iter()
        .filter(|o| matches!(&o.report, Ok(r) if r.status == SolveStatus::Converged))
        .count();
    let summary = SolveSummary {
        tool_version: TOOL_VERSION.to_string(),
        coercivity: coercivity_check(&config, &result)?,
        config,
        starts: result.outcomes.len(),
        converged,
        dropped: result.dropped,
        records: result.records.len(),
        critical_values: result.critical_values(),
        orbit_files,
        start_details: result.outcomes.iter().map(start_summary).collect(),
    };
    let summary_path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    write_text(&summary_path, &text)?;

    let exit_code = if summary.records > 0 { EXIT_OK } else { EXIT_NO_CONVERGENCE };
    Ok(SolveOutcome {
        summary,
        summary_path,
        orbit_paths,
        exit_code,
    })
}
