//! Seeded sweep over every inequality and structural property the
//! variational argument relies on.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_holder_bound, check_pairwise_identity, check_wirtinger};
use crate::error::Result;
use crate::loopspace::{self, Layout, LoopConfiguration};
use crate::potential::PotentialSpec;

/// One ledger line. `worst_slack` is in the check's natural orientation:
/// for `lhs <= rhs` it is the smallest normalized `rhs - lhs` (pass when
/// `>= tolerance`, a non-positive number); for identities and residuals it is
/// the largest normalized discrepancy (pass when `<= tolerance`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerCheck {
    pub name: String,
    pub samples: usize,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub n_samples: usize,
    pub seed: u64,
    pub checks: Vec<LedgerCheck>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl LedgerReport {
    pub fn check(&self, name: &str) -> Option<&LedgerCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Loop shape used for the loop-valued samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerShape {
    pub dim: usize,
    pub harmonics: usize,
    pub n_t: usize,
}

#[derive(Clone, Copy)]
enum Sense {
    /// Worst value is the minimum; pass when `>= tol`.
    AtLeast,
    /// Worst value is the maximum; pass when `<= tol`.
    AtMost,
}

struct Tally {
    name: &'static str,
    sense: Sense,
    tolerance: f64,
    samples: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, sense: Sense, tolerance: f64) -> Self {
        let worst = match sense {
            Sense::AtLeast => f64::INFINITY,
            Sense::AtMost => 0.0,
        };
        Self {
            name,
            sense,
            tolerance,
            samples: 0,
            worst,
        }
    }

    fn record(&mut self, value: f64) {
        self.samples += 1;
        self.worst = match self.sense {
            // NaN must never pass
            Sense::AtLeast if value.is_nan() => f64::NEG_INFINITY,
            Sense::AtMost if value.is_nan() => f64::INFINITY,
            Sense::AtLeast => self.worst.min(value),
            Sense::AtMost => self.worst.max(value),
        };
    }

    fn finish(self) -> LedgerCheck {
        let passed = match self.sense {
            Sense::AtLeast => self.worst >= self.tolerance,
            Sense::AtMost => self.worst <= self.tolerance,
        };
        LedgerCheck {
            name: self.name.to_string(),
            samples: self.samples,
            worst_slack: if self.samples == 0 { 0.0 } else { self.worst },
            tolerance: self.tolerance,
            passed,
        }
    }
}

fn random_loop(rng: &mut ChaCha8Rng, n: usize, shape: LedgerShape, period: f64, first_only: bool) -> Result<LoopConfiguration> {
    let layout = Layout::new(n, shape.dim, shape.harmonics);
    let mut c = vec![0.0; layout.len()];
    for body in 0..n {
        let harmonics = if first_only { 1 } else { shape.harmonics };
        for h in 0..harmonics {
            let s = layout.slot(body, h);
            let amp = 1.0 / loopspace::odd_harmonic(h) as f64;
            for q in s..s + 2 * shape.dim {
                c[q] = amp * rng.gen_range(-1.0..1.0);
            }
        }
    }
    LoopConfiguration::new(n, shape.dim, period, shape.harmonics, c)
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Runs every check on `n_samples` seeded draws. Deterministic checks (blend
/// regularity, blow-down sweep) run regardless of `n_samples`.
pub fn run_ledger(spec: &PotentialSpec, shape: LedgerShape, n_samples: usize, seed: u64) -> Result<LedgerReport> {
    loopspace::check_grid(shape.harmonics, shape.n_t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = *spec.params();
    let masses = spec.masses();
    let n = masses.len();
    let k = shape.dim;
    let period = spec.period();
    let mut warnings = Vec::new();
    if n_samples == 0 {
        warnings.push("n_samples = 0: sampled checks pass vacuously".to_string());
    }

    let mut identity = Tally::new("pairwise_identity", Sense::AtMost, 1e-10);
    let mut holder = Tally::new("holder_bound", Sense::AtLeast, -1e-12);
    let mut wirtinger = Tally::new("wirtinger", Sense::AtLeast, -1e-12);
    let mut wirtinger_eq = Tally::new("wirtinger_first_harmonic_equality", Sense::AtMost, 1e-12);
    let mut margin = Tally::new("strong_force_margin", Sense::AtLeast, -1e-12);
    let mut v6 = Tally::new("v6_symmetry", Sense::AtMost, 1e-12);
    let mut growth = Tally::new("tail_growth", Sense::AtLeast, -1e-12);
    let mut antiperiodic = Tally::new("antiperiodicity", Sense::AtMost, 1e-12);
    let mut zero_mean = Tally::new("zero_mean", Sense::AtMost, 1e-12);
    let mut parseval = Tally::new("parseval_kinetic", Sense::AtMost, 1e-10);
    let mut blend = Tally::new("blend_c1", Sense::AtMost, 1e-10);
    let mut blow_down = Tally::new("blow_down", Sense::AtMost, 0.0);

    let mut thetas = vec![0.0, 0.5, 1.0, 1.9];
    if p.theta >= 0.0 && !thetas.contains(&p.theta) {
        thetas.push(p.theta);
    }

    for s in 0..n_samples {
        // configurations in R^k
        if n >= 2 {
            let x: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let sl = check_pairwise_identity(masses, &x)?;
            identity.record(sl.slack / sl.scale.max(f64::MIN_POSITIVE));
            let sl = check_holder_bound(masses, &x, thetas[s % thetas.len()])?;
            holder.record(sl.slack / sl.scale);
        }

        // loops
        let lp = random_loop(&mut rng, n, shape, period, false)?;
        let wc = (period / (2.0 * PI)).powi(2);
        for (i, sl) in check_wirtinger(&lp).into_iter().enumerate() {
            wirtinger.record(sl / (wc * lp.velocity_l2_norm_sq(i)).max(f64::MIN_POSITIVE));
        }
        let first = random_loop(&mut rng, n, shape, period, true)?;
        for (i, sl) in check_wirtinger(&first).into_iter().enumerate() {
            wirtinger_eq.record(sl.abs() / first.l2_norm_sq(i).max(1.0));
        }
        let t = rng.gen_range(0.0..period);
        for i in 0..n {
            let x = lp.position(i, t);
            let y = lp.position(i, t + period / 2.0);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            antiperiodic.record(loopspace::distance(&x, &y.iter().map(|v| -v).collect::<Vec<_>>()) / (1.0 + norm));
        }
        let path = loopspace::sample_trajectory(&lp, shape.n_t)?;
        let magnitude = lp.coefficients().iter().fold(0.0f64, |m, c| m.max(c.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for d in 0..k {
                let mean = (0..shape.n_t).map(|j| path.position(j, i)[d]).sum::<f64>() / shape.n_t as f64;
                zero_mean.record(mean.abs() / magnitude);
            }
        }
        let closed = loopspace::kinetic_energy(&lp, masses)?;
        let mut quad = 0.0;
        for j in 0..shape.n_t {
            for (i, m) in masses.iter().enumerate() {
                quad += 0.5 * m * path.velocity(j, i).iter().map(|v| v * v).sum::<f64>();
            }
        }
        quad *= period / shape.n_t as f64;
        parseval.record((closed - quad).abs() / closed.max(f64::MIN_POSITIVE));

        // potential
        if n >= 2 {
            let (i, j) = random_pair(&mut rng, n);
            let r = p.r1 * 10f64.powf(rng.gen_range(-8.0..0.0));
            if r < p.r1 {
                let m = spec.strong_force_margin(i, j, r)?;
                let v = (1.0 - p.modulation_eps) * masses[i] * masses[j] * spec.profile(r).0;
                margin.record(m / v.abs());
            }

            let t = rng.gen_range(0.0..period);
            let xi: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0 * p.r2..2.0 * p.r2)).collect();
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 0.0 {
                let neg: f64 = xi.iter().map(|v| -v).map(|v| v * v).sum::<f64>().sqrt();
                let a = spec.pair_potential(t, i, j, r)?;
                let b = spec.pair_potential(t + period / 2.0, j, i, neg)?;
                v6.record((a - b).abs() / (1.0 + a.abs()));
            }

            let r = p.r2 * (1.0 + 10f64.powf(rng.gen_range(-6.0..3.0)));
            let v = spec.pair_potential(t, i, j, r)?;
            let bound = p.g * (1.0 + p.modulation_eps) * masses[i] * masses[j] * r.powf(p.theta);
            growth.record((bound - v) / bound);
        }
    }

    if n >= 2 {
        // one-sided derivatives and values of the blend against the piecewise formulas
        let (left, right) = spec.blend_end_slopes();
        let (y0, y1) = spec.blend_end_values();
        let inner = p.a * p.alpha * p.r1.powf(-p.alpha - 1.0);
        let tail = p.g * p.theta * p.r2.powf(p.theta - 1.0);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
        blend.record(rel(left, inner));
        blend.record(rel(right, tail));
        blend.record(rel(y0, -p.a * p.r1.powf(-p.alpha)));
        blend.record(rel(y1, p.g * p.r2.powf(p.theta)));

        // V -> -inf uniformly in t: each halving of r lowers the worst case over t
        let worst_over_t = |r: f64| -> Result<f64> {
            let mut w = f64::NEG_INFINITY;
            for q in 0..16 {
                w = w.max(spec.pair_potential(period * q as f64 / 16.0, 0, 1, r)?);
            }
            Ok(w)
        };
        let mut prev = worst_over_t(p.r1 / 2.0)?;
        for j in 2..=40 {
            let cur = worst_over_t(p.r1 * 2f64.powi(-j))?;
            blow_down.record(if cur < prev { 0.0 } else { 1.0 });
            prev = cur;
        }
        let bound = -1e12 * masses[0] * masses[1] * p.a * p.r1.powf(-p.alpha);
        blow_down.record(if prev < bound { 0.0 } else { 1.0 });
    } else {
        warnings.push("single body: pairwise and potential checks skipped".to_string());
    }

    let checks: Vec<LedgerCheck> = [
        identity,
        holder,
        wirtinger,
        wirtinger_eq,
        antiperiodic,
        zero_mean,
        parseval,
        margin,
        v6,
        growth,
        blend,
        blow_down,
    ]
    .into_iter()
    .map(Tally::finish)
    .collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(LedgerReport {
        n_samples,
        seed,
        checks,
        warnings,
        passed,
    })
}
