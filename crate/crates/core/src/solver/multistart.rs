use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{descend, dedupe, DedupeOptions, SolveOptions, SolveReport};
use crate::action::ActionFunctional;
use crate::error::{OrbitError, Result};
use crate::loopspace::{Layout, LoopConfiguration};
use crate::potential::PotentialSpec;
use crate::verify::euler_lagrange_residual;

/// A catalogued critical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub orbit: LoopConfiguration,
    pub action_value: f64,
    pub grad_norm: f64,
    pub el_residual: f64,
    pub winding_seed_class: i64,
    pub dedup_key: String,
}

impl OrbitRecord {
    pub fn new(orbit: LoopConfiguration, action_value: f64, grad_norm: f64, el_residual: f64, class: i64) -> Self {
        let dedup_key = format!("w{class}:{action_value:.9e}");
        Self {
            orbit,
            action_value,
            grad_norm,
            el_residual,
            winding_seed_class: class,
            dedup_key,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultistartOptions {
    pub dim: usize,
    pub harmonics: usize,
    /// Seed noise amplitude, relative to the seed radius.
    pub perturbation: f64,
    pub residual_tol: f64,
    pub action_rel_tol: f64,
    pub path_tol: f64,
    /// Worker threads; 0 picks the rayon default.
    pub threads: usize,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self {
            dim: 2,
            harmonics: 8,
            perturbation: 1e-2,
            residual_tol: 1e-7,
            action_rel_tol: 1e-6,
            path_tol: 1e-3,
            threads: 0,
        }
    }
}

/// What happened to one start.
#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub class: i64,
    pub start: usize,
    pub seed_radius: f64,
    pub report: std::result::Result<SolveReport, OrbitError>,
    pub el_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartResult {
    /// Deduplicated records sorted by action value.
    pub records: Vec<OrbitRecord>,
    /// Every start in (class, start) order.
    pub outcomes: Vec<StartOutcome>,
    /// Starts that did not converge or missed the residual tolerance.
    pub dropped: usize,
}

impl MultistartResult {
    pub fn critical_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.action_value).collect()
    }
}

fn check_class(class: i64, harmonics: usize) -> Result<usize> {
    if class % 2 == 0 {
        return Err(OrbitError::InvalidOptions(format!(
            "winding class {class} is even; antiperiodic loops only carry odd harmonics"
        )));
    }
    let h = (class.unsigned_abs() as usize - 1) / 2;
    if h >= harmonics {
        return Err(OrbitError::InvalidOptions(format!(
            "winding class {class} needs harmonic {} but M = {harmonics}",
            class.abs()
        )));
    }
    Ok(h)
}

/// Bodies spaced evenly on a circle of `radius`, all turning `class` times
/// per period (negative classes turn clockwise). Uses the first two axes.
pub fn circular_seed(
    n_bodies: usize,
    dim: usize,
    period: f64,
    harmonics: usize,
    class: i64,
    radius: f64,
) -> Result<LoopConfiguration> {
    if dim < 2 {
        return Err(OrbitError::InvalidOptions("circular seeds need k >= 2".into()));
    }
    let h = check_class(class, harmonics)?;
    let layout = Layout::new(n_bodies, dim, harmonics);
    let mut c = vec![0.0; layout.len()];
    let sign = class.signum() as f64;
    for body in 0..n_bodies {
        let phase = 2.0 * std::f64::consts::PI * body as f64 / n_bodies as f64;
        let (s, co) = phase.sin_cos();
        let slot = layout.slot(body, h);
        c[slot] = radius * co;
        c[slot + 1] = radius * s;
        c[slot + dim] = -sign * radius * s;
        c[slot + dim + 1] = sign * radius * co;
    }
    LoopConfiguration::new(n_bodies, dim, period, harmonics, c)
}

/// Radius minimizing the action over exact circular seeds of `class`:
/// a log-spaced scan followed by golden-section refinement in `ln r`.
pub fn seed_radius(spec: &PotentialSpec, dim: usize, harmonics: usize, n_t: usize, class: i64) -> Result<f64> {
    let f = ActionFunctional::new(spec, dim, harmonics, n_t)?;
    let n = spec.n_bodies();
    let period = spec.period();
    let eval = |log_r: f64| -> f64 {
        circular_seed(n, dim, period, harmonics, class, log_r.exp())
            .and_then(|lp| f.value(&lp))
            .map(|e| e.value)
            .unwrap_or(f64::INFINITY)
    };
    let p = spec.params();
    let (lo, hi) = ((1e-3 * p.r1).ln(), (10.0 * p.r2 * n as f64).ln());
    let steps = 240;
    let grid: Vec<f64> = (0..=steps).map(|q| lo + (hi - lo) * q as f64 / steps as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| eval(x)).collect();
    let best = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty scan");
    if !values[best].is_finite() {
        return Err(OrbitError::InvalidStart(format!(
            "no collision-free circular seed for class {class}"
        )));
    }
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps)]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = eval(x2);
        }
    }
    Ok((0.5 * (a + b)).exp())
}

fn run_start(
    spec: &PotentialSpec,
    opts: &SolveOptions,
    mopts: &MultistartOptions,
    class: i64,
    start: usize,
    stream: u64,
    radius: f64,
) -> StartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let n_t = opts.grid_points(mopts.harmonics);
    let report = circular_seed(spec.n_bodies(), mopts.dim, spec.period(), mopts.harmonics, class, radius)
        .and_then(|lp| {
            let noisy = lp
                .coefficients()
                .iter()
                .map(|c| c + mopts.perturbation * radius * rng.gen_range(-1.0..1.0))
                .collect();
            lp.with_coefficients(noisy)
        })
        .and_then(|lp| descend(spec, &lp, opts));
    let el_residual = match &report {
        Ok(r) if r.converged() => euler_lagrange_residual(spec, &r.final_loop, n_t).ok(),
        _ => None,
    };
    StartOutcome {
        class,
        start,
        seed_radius: radius,
        report,
        el_residual,
    }
}

/// One descent per `(class, start)`, run in parallel and merged
/// deterministically: converged starts whose Euler-Lagrange residual is
/// below `residual_tol` are deduplicated and sorted by action.
pub fn multistart(
    spec: &PotentialSpec,
    classes: &[i64],
    starts_per_class: usize,
    opts: &SolveOptions,
    mopts: &MultistartOptions,
) -> Result<MultistartResult> {
    opts.validate()?;
    for &c in classes {
        check_class(c, mopts.harmonics)?;
    }
    let n_t = opts.grid_points(mopts.harmonics);
    let radii = classes
        .iter()
        .map(|&c| seed_radius(spec, mopts.dim, mopts.harmonics, n_t, c))
        .collect::<Result<Vec<f64>>>()?;
    let jobs: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|ci| (0..starts_per_class).map(move |s| (ci, s)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mopts.threads)
        .build()
        .map_err(|e| OrbitError::InvalidOptions(format!("thread pool: {e}")))?;
    let outcomes: Vec<StartOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(ci, s)| {
                let stream = ((ci as u64) << 32) | s as u64;
                run_start(spec, opts, mopts, classes[ci], s, stream, radii[ci])
            })
            .collect()
    });

    let mut candidates = Vec::new();
    let mut dropped = 0;
    for o in &outcomes {
        match (&o.report, o.el_residual) {
            (Ok(r), Some(res)) if r.converged() && res < mopts.residual_tol => {
                candidates.push(OrbitRecord::new(
                    r.final_loop.clone(),
                    r.action_value,
                    r.grad_norm,
                    res,
                    o.class,
                ));
            }
            _ => dropped += 1,
        }
    }
    let dedupe_opts = DedupeOptions {
        action_rel_tol: mopts.action_rel_tol,
        path_tol: mopts.path_tol,
        shift_grid: n_t,
        half_period_only: spec.params().modulation_eps != 0.0,
    };
    let records = dedupe(candidates, &dedupe_opts)?;
    Ok(MultistartResult {
        records,
        outcomes,
        dropped,
    })
}
