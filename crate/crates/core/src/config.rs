//! Run configuration. Unknown keys are rejected; [`RunConfig::resolve`]
//! materializes every default so a resolved config reproduces its run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{OrbitError, Result};
use crate::loopspace::{check_grid, default_grid_points};
use crate::potential::{PotentialParams, PotentialSpec};
use crate::solver::{MultistartOptions, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n_bodies: usize,
    pub dim: usize,
    pub period: f64,
    /// Defaults to unit masses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub harmonics: usize,
    /// Defaults to `4 * harmonics + 9`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            harmonics: 8,
            n_t: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub history_len: usize,
    pub seed: u64,
    pub step_guard: f64,
    pub winding_classes: Vec<i64>,
    pub starts_per_class: usize,
    pub perturbation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolveOptions::default();
        let m = MultistartOptions::default();
        Self {
            max_iters: s.max_iters,
            grad_tol: s.grad_tol,
            history_len: s.history_len,
            seed: s.seed,
            step_guard: s.step_guard,
            winding_classes: vec![1, 3, 5],
            starts_per_class: 2,
            perturbation: m.perturbation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    pub action_rel_tol: f64,
    pub path_tol: f64,
    pub residual_tol: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        let m = MultistartOptions::default();
        Self {
            directory: "orbits".into(),
            action_rel_tol: m.action_rel_tol,
            path_tol: m.path_tol,
            residual_tol: m.residual_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub potential: PotentialParams,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn invalid(e: OrbitError) -> OrbitError {
    match e {
        OrbitError::ConfigInvalid(_) => e,
        other => OrbitError::ConfigInvalid(other.to_string()),
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RunConfig = serde_json::from_str(text).map_err(|e| OrbitError::ConfigInvalid(e.to_string()))?;
        raw.resolve()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrbitError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Fills in defaults and re-validates every module-level invariant.
    pub fn resolve(mut self) -> Result<Self> {
        let p = &self.problem;
        if p.masses.is_none() {
            self.problem.masses = Some(vec![1.0; p.n_bodies]);
        }
        if self.discretization.n_t.is_none() {
            self.discretization.n_t = Some(default_grid_points(self.discretization.harmonics));
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let p = &self.problem;
        let fail = |m: String| Err(OrbitError::ConfigInvalid(m));
        if p.n_bodies == 0 {
            return fail("problem.n_bodies must be positive".into());
        }
        if p.dim < 2 {
            return fail("problem.dim must be at least 2".into());
        }
        let masses = self.masses();
        if masses.len() != p.n_bodies {
            return fail(format!(
                "problem.masses has {} entries for {} bodies",
                masses.len(),
                p.n_bodies
            ));
        }
        self.spec()?;
        if self.discretization.harmonics == 0 {
            return fail("discretization.harmonics must be at least 1".into());
        }
        check_grid(self.discretization.harmonics, self.n_t()).map_err(invalid)?;
        self.solve_options().validate().map_err(invalid)?;
        if self.solver.winding_classes.is_empty() {
            return fail("solver.winding_classes must not be empty".into());
        }
        for &w in &self.solver.winding_classes {
            if w % 2 == 0 {
                return fail(format!(
                    "winding class {w} is even; only odd classes are antiperiodic"
                ));
            }
            if w.unsigned_abs() as usize > 2 * self.discretization.harmonics - 1 {
                return fail(format!(
                    "winding class {w} exceeds the highest harmonic {}",
                    2 * self.discretization.harmonics - 1
                ));
            }
        }
        let o = &self.output;
        for (name, v) in [
            ("output.action_rel_tol", o.action_rel_tol),
            ("output.path_tol", o.path_tol),
            ("output.residual_tol", o.residual_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive"));
            }
        }
        if !(self.solver.perturbation >= 0.0 && self.solver.perturbation.is_finite()) {
            return fail("solver.perturbation must be non-negative".into());
        }
        Ok(())
    }

    pub fn masses(&self) -> Vec<f64> {
        self.problem
            .masses
            .clone()
            .unwrap_or_else(|| vec![1.0; self.problem.n_bodies])
    }

    pub fn n_t(&self) -> usize {
        self.discretization
            .n_t
            .unwrap_or_else(|| default_grid_points(self.discretization.harmonics))
    }

    pub fn spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::new(self.potential, self.masses(), self.problem.period).map_err(invalid)
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            max_iters: s.max_iters,
            grad_tol: s.grad_tol,
            history_len: s.history_len,
            seed: s.seed,
            step_guard: s.step_guard,
            n_t: Some(self.n_t()),
        }
    }

    pub fn multistart_options(&self, threads: usize) -> MultistartOptions {
        MultistartOptions {
            dim: self.problem.dim,
            harmonics: self.discretization.harmonics,
            perturbation: self.solver.perturbation,
            residual_tol: self.output.residual_tol,
            action_rel_tol: self.output.action_rel_tol,
            path_tol: self.output.path_tol,
            threads,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
