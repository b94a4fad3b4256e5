//! Critical-point search for the action functional.
//!
//! [`descend`] runs limited-memory quasi-Newton descent with a backtracking
//! line search that refuses any step leaving the collision-free region on the
//! evaluation grid or shrinking the minimum separation by more than
//! `step_guard`. [`multistart`] seeds one descent per (winding class, start)
//! and merges the converged results through [`dedupe`].

mod dedupe;
mod lbfgs;
mod multistart;

pub use dedupe::{dedupe, shift_aligned_distance, DedupeOptions};
pub use multistart::{
    circular_seed, multistart, seed_radius, MultistartOptions, MultistartResult, OrbitRecord,
    StartOutcome,
};

use serde::{Deserialize, Serialize};

use crate::action::{ActionEvaluation, ActionFunctional};
use crate::error::{OrbitError, Result};
use crate::loopspace::{default_grid_points, LoopConfiguration};
use crate::potential::PotentialSpec;
use lbfgs::{dot, History};

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_TRIALS: usize = 60;
/// Relative action change below which consecutive iterates count as settled.
pub const SETTLE_TOL: f64 = 1e-12;
/// Number of trailing iterations that must be settled before stopping.
pub const SETTLE_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub history_len: usize,
    pub seed: u64,
    /// Largest allowed relative drop of the minimum separation in one step.
    pub step_guard: f64,
    /// Grid size; `None` means `4M + 9`.
    pub n_t: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 3000,
            grad_tol: 1e-9,
            history_len: 12,
            seed: 0,
            step_guard: 0.5,
            n_t: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return Err(OrbitError::InvalidOptions(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(OrbitError::InvalidOptions("max_iters must be at least 1".into()));
        }
        if !(self.step_guard > 0.0 && self.step_guard <= 1.0) {
            return Err(OrbitError::InvalidOptions(format!(
                "step_guard must lie in (0, 1], got {}",
                self.step_guard
            )));
        }
        Ok(())
    }

    pub fn grid_points(&self, harmonics: usize) -> usize {
        self.n_t.unwrap_or_else(|| default_grid_points(harmonics))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// Every trial step was rejected by the collision guard.
    StalledNearCollision,
    /// Every trial step failed the decrease test away from any collision.
    LineSearchFailed,
}

/// One accepted iterate: the numerical record of a Palais-Smale sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsEntry {
    pub action: f64,
    pub grad_norm: f64,
    pub kinetic: f64,
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub final_loop: LoopConfiguration,
    /// Starting value plus the accepted increments; matches a fresh
    /// evaluation of `final_loop` up to rounding.
    pub action_value: f64,
    pub grad_norm: f64,
    pub kinetic: f64,
    pub min_separation: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub ps_trace: Vec<PsEntry>,
    pub status: SolveStatus,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

fn entry(ev: &ActionEvaluation) -> PsEntry {
    PsEntry {
        action: ev.value,
        grad_norm: ev.grad_norm(),
        kinetic: ev.kinetic,
        min_separation: ev.min_separation,
    }
}

fn settled(trace: &[PsEntry]) -> bool {
    if trace.len() <= SETTLE_WINDOW {
        return false;
    }
    trace[trace.len() - SETTLE_WINDOW - 1..]
        .windows(2)
        .all(|w| (w[1].action - w[0].action).abs() < SETTLE_TOL * (1.0 + w[1].action.abs()))
}

enum Rejection {
    Collision,
    Decrease,
}

struct Accepted {
    lp: LoopConfiguration,
    ev: ActionEvaluation,
    step: Vec<f64>,
}

fn line_search(
    f: &ActionFunctional,
    lp: &LoopConfiguration,
    ev: &ActionEvaluation,
    dir: &[f64],
    alpha0: f64,
    step_guard: f64,
    evaluations: &mut usize,
) -> std::result::Result<Accepted, Rejection> {
    let slope = dot(&ev.gradient, dir);
    let sep_floor = (1.0 - step_guard) * ev.min_separation;
    let mut alpha = alpha0;
    let mut last = Rejection::Decrease;
    for _ in 0..MAX_TRIALS {
        let step: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
        let coeffs = lp.coefficients().iter().zip(&step).map(|(c, s)| c + s).collect();
        let trial = lp.with_coefficients(coeffs);
        *evaluations += 1;
        match trial.and_then(|t| f.evaluate(&t).map(|e| (t, e))) {
            Ok((t, mut e)) if e.value.is_finite() => {
                if ev.min_separation.is_finite() && e.min_separation < sep_floor {
                    last = Rejection::Collision;
                } else {
                    // the increment resolves decreases far below the rounding
                    // level of f, which is where the final iterations live
                    match f.increment(lp, &step) {
                        Ok(df) if df <= ARMIJO_C1 * alpha * slope => {
                            e.value = ev.value + df;
                            return Ok(Accepted { lp: t, ev: e, step });
                        }
                        Err(OrbitError::CollisionSample { .. }) => last = Rejection::Collision,
                        _ => last = Rejection::Decrease,
                    }
                }
            }
            Ok(_) | Err(OrbitError::CollisionSample { .. }) => last = Rejection::Collision,
            Err(_) => last = Rejection::Decrease,
        }
        alpha *= BACKTRACK;
    }
    Err(last)
}

/// Descends from `loop0` towards a critical point of the discretized action.
pub fn descend(spec: &PotentialSpec, loop0: &LoopConfiguration, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let n_t = opts.grid_points(loop0.harmonics());
    let f = ActionFunctional::for_loop(spec, loop0, n_t)?;
    let mut ev = match f.evaluate(loop0) {
        Ok(ev) => ev,
        Err(OrbitError::CollisionSample { node, i, j }) => {
            return Err(OrbitError::InvalidStart(format!(
                "bodies {i} and {j} coincide at grid node {node}"
            )))
        }
        Err(e) => return Err(e),
    };
    if !ev.value.is_finite() {
        return Err(OrbitError::InvalidStart("action is not finite".into()));
    }
    let mut lp = loop0.clone();
    let mut trace = vec![entry(&ev)];
    let mut history = History::new(opts.history_len);
    let mut evaluations = 1;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIters;

    while iterations < opts.max_iters {
        let gnorm = ev.grad_norm();
        if gnorm == 0.0 || (gnorm < opts.grad_tol && settled(&trace)) {
            status = SolveStatus::Converged;
            break;
        }
        let mut outcome = None;
        for attempt in 0..2 {
            if attempt == 1 && history.is_empty() {
                break;
            }
            let (dir, alpha0) = if history.is_empty() || attempt == 1 {
                history.clear();
                let dir: Vec<f64> = ev.gradient.iter().map(|g| -g).collect();
                (dir, 1.0 / gnorm.max(1.0))
            } else {
                let dir = history.direction(&ev.gradient);
                if dot(&dir, &ev.gradient) >= 0.0 {
                    continue;
                }
                (dir, 1.0)
            };
            match line_search(&f, &lp, &ev, &dir, alpha0, opts.step_guard, &mut evaluations) {
                Ok(acc) => {
                    outcome = Some(Ok(acc));
                    break;
                }
                Err(r) => outcome = Some(Err(r)),
            }
        }
        match outcome {
            Some(Ok(acc)) => {
                let y = acc.ev.gradient.iter().zip(&ev.gradient).map(|(a, b)| a - b).collect();
                history.push(acc.step, y);
                lp = acc.lp;
                ev = acc.ev;
                trace.push(entry(&ev));
                iterations += 1;
            }
            Some(Err(r)) => {
                status = if gnorm < opts.grad_tol {
                    SolveStatus::Converged
                } else {
                    match r {
                        Rejection::Collision => SolveStatus::StalledNearCollision,
                        Rejection::Decrease => SolveStatus::LineSearchFailed,
                    }
                };
                break;
            }
            None => unreachable!("steepest-descent attempt always runs"),
        }
    }
    if status == SolveStatus::MaxIters && ev.grad_norm() < opts.grad_tol {
        status = SolveStatus::Converged;
    }
    Ok(SolveReport {
        action_value: ev.value,
        grad_norm: ev.grad_norm(),
        kinetic: ev.kinetic,
        min_separation: ev.min_separation,
        final_loop: lp,
        iterations,
        evaluations,
        ps_trace: trace,
        status,
    })
}
