//! Numerical checks behind the existence argument: Euler-Lagrange residuals,
//! the inequality chain that makes the action coercive, an explicit
//! coercivity bound, and the collision blow-up probe.

mod ledger;

pub use ledger::{run_ledger, LedgerCheck, LedgerReport, LedgerShape};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::action::ActionFunctional;
use crate::error::{OrbitError, Result};
use crate::loopspace::{self, default_grid_points, kinetic_energy, Layout, LoopConfiguration};
use crate::potential::PotentialSpec;

/// Relative floor of the probe band for the bounded-potential constant.
pub const B_PROBE_FLOOR: f64 = 1e-3;

/// Grid L2 norm of `m_i x_i'' + grad_{x_i} V`, divided by `1 + kinetic`.
pub fn euler_lagrange_residual(spec: &PotentialSpec, lp: &LoopConfiguration, n_t: usize) -> Result<f64> {
    let masses = spec.masses();
    let kinetic = kinetic_energy(lp, masses)?;
    let path = loopspace::sample_trajectory(lp, n_t)?;
    let (n, k) = (lp.n_bodies(), lp.dim());
    let weight = lp.period() / n_t as f64;
    let mut grad = vec![0.0; n * k];
    let mut total = 0.0;
    for j in 0..n_t {
        grad.iter_mut().for_each(|g| *g = 0.0);
        match spec.potential_and_gradient(path.times[j], path.snapshot(j), Some(&mut grad)) {
            Ok(_) => {}
            Err(OrbitError::CollisionSample { i, j: l, .. }) => {
                return Err(OrbitError::CollisionSample { node: j, i, j: l })
            }
            Err(e) => return Err(e),
        }
        for i in 0..n {
            let acc = path.acceleration(j, i);
            for d in 0..k {
                let r = masses[i] * acc[d] + grad[i * k + d];
                total += weight * r * r;
            }
        }
    }
    Ok(total.sqrt() / (1.0 + kinetic))
}

/// Two sides of an inequality or identity and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` for inequalities `lhs <= rhs`; `|lhs - rhs|` for identities.
    pub slack: f64,
    /// Magnitude the slack should be compared against.
    pub scale: f64,
}

fn pair_sums(masses: &[f64], positions: &[f64], theta: f64) -> (f64, f64, f64) {
    let n = masses.len();
    let k = positions.len() / n;
    let (mut weights, mut sq, mut pow) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let w = masses[i] * masses[j];
            let r = loopspace::distance(&positions[i * k..(i + 1) * k], &positions[j * k..(j + 1) * k]);
            weights += w;
            sq += w * r * r;
            pow += w * r.powf(theta);
        }
    }
    (weights, sq, pow)
}

fn check_shape(masses: &[f64], positions: &[f64]) -> Result<()> {
    if masses.is_empty() || positions.len() % masses.len() != 0 {
        return Err(OrbitError::ShapeMismatch(format!(
            "{} position entries for {} masses",
            positions.len(),
            masses.len()
        )));
    }
    Ok(())
}

/// `sum_{i<j} m_i m_j |x_i - x_j|^2 = (sum m_i)(sum m_i |x_i|^2) - |sum m_i x_i|^2`.
pub fn check_pairwise_identity(masses: &[f64], positions: &[f64]) -> Result<Slack> {
    check_shape(masses, positions)?;
    let k = positions.len() / masses.len();
    let (_, lhs, _) = pair_sums(masses, positions, 2.0);
    let total_mass: f64 = masses.iter().sum();
    let mut weighted_sq = 0.0;
    let mut moment = vec![0.0; k];
    for (i, m) in masses.iter().enumerate() {
        let x = &positions[i * k..(i + 1) * k];
        weighted_sq += m * x.iter().map(|v| v * v).sum::<f64>();
        for d in 0..k {
            moment[d] += m * x[d];
        }
    }
    let leading = total_mass * weighted_sq;
    let rhs = leading - moment.iter().map(|v| v * v).sum::<f64>();
    Ok(Slack {
        lhs,
        rhs,
        slack: (lhs - rhs).abs(),
        scale: leading.max(lhs),
    })
}

/// Power-mean bound
/// `sum m_i m_j |x_i-x_j|^theta <= (sum m_i m_j)^((2-theta)/2) (sum m_i m_j |x_i-x_j|^2)^(theta/2)`.
///
/// Holds for `0 <= theta < 2`; for negative `theta` the inequality reverses
/// and the returned slack is negative in general.
pub fn check_holder_bound(masses: &[f64], positions: &[f64], theta: f64) -> Result<Slack> {
    if theta >= 2.0 {
        return Err(OrbitError::ThetaOutOfRange(theta));
    }
    check_shape(masses, positions)?;
    let (weights, sq, lhs) = pair_sums(masses, positions, theta);
    let rhs = weights.powf((2.0 - theta) / 2.0) * sq.powf(theta / 2.0);
    Ok(Slack {
        lhs,
        rhs,
        slack: rhs - lhs,
        scale: 1.0 + rhs,
    })
}

/// Per body, `(T/2pi)^2 ||x_i'||^2 - ||x_i||^2` in closed form.
pub fn check_wirtinger(lp: &LoopConfiguration) -> Vec<f64> {
    let c = (lp.period() / (2.0 * PI)).powi(2);
    (0..lp.n_bodies())
        .map(|i| c * lp.velocity_l2_norm_sq(i) - lp.l2_norm_sq(i))
        .collect()
}

/// Constants of the scalar coercivity inequality
/// `f >= E - C E^(theta/2) - B`, `E` the kinetic energy, and the resulting
/// bound `E <= A` on the sublevel set `{f <= K}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityBound {
    pub c: f64,
    pub b: f64,
    /// Largest `|V_ij|` over the bounded band, per pair and time.
    pub b_max: f64,
    pub k: f64,
    pub a: f64,
}

/// Builds `C` and `B` for `spec` and returns the kinetic bound `A(K)`.
///
/// For `0 <= theta < 2` the tail enters through
/// `C = g(1+eps) (sum_{i<j} m_i m_j)^((2-theta)/2) (sum m_i)^(theta/2) (T/2pi)^theta T^(1-theta/2) 2^(theta/2)`.
/// For `theta < 0` the tail is bounded by its value at `r2`, so it is folded
/// into `B` and `C = 0`.
pub fn coercivity_bound(spec: &PotentialSpec, k: f64) -> Result<CoercivityBound> {
    let p = spec.params();
    if p.theta >= 2.0 {
        return Err(OrbitError::ThetaOutOfRange(p.theta));
    }
    let masses = spec.masses();
    let n = masses.len();
    let period = spec.period();
    let eps = p.modulation_eps;
    let mut pair_weights = 0.0;
    let mut max_pair = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            pair_weights += masses[i] * masses[j];
            max_pair = max_pair.max(masses[i] * masses[j]);
        }
    }
    let mut profile_max = spec.max_abs_profile(B_PROBE_FLOOR * p.r1);
    let c = if p.theta >= 0.0 {
        let theta = p.theta;
        p.g * (1.0 + eps)
            * pair_weights.powf((2.0 - theta) / 2.0)
            * masses.iter().sum::<f64>().powf(theta / 2.0)
            * (period / (2.0 * PI)).powf(theta)
            * period.powf(1.0 - theta / 2.0)
            * 2f64.powf(theta / 2.0)
    } else {
        profile_max = profile_max.max(p.g * p.r2.powf(p.theta));
        0.0
    };
    let b_max = (1.0 + eps) * max_pair * profile_max;
    let pairs = (n * n - n) as f64 / 2.0;
    let b = period * pairs * b_max;
    let a = largest_root(c, b, p.theta, k)?;
    Ok(CoercivityBound { c, b, b_max, k, a })
}

/// Largest `E >= 0` with `E - C E^(theta/2) - B <= K`, or 0 when no such `E` exists.
///
/// Bisection runs to adjacent floating-point numbers and keeps the lower end,
/// so exact roots such as `C = 0` or `theta = 1, C = 1, B = K = 0` come out exact.
pub fn largest_root(c: f64, b: f64, theta: f64, k: f64) -> Result<f64> {
    if theta >= 2.0 || !theta.is_finite() {
        return Err(OrbitError::ThetaOutOfRange(theta));
    }
    if !(c >= 0.0 && b >= 0.0 && k.is_finite() && c.is_finite() && b.is_finite()) {
        return Err(OrbitError::InvalidOptions(format!(
            "coercivity constants must be finite with C, B >= 0 (C={c}, B={b}, K={k})"
        )));
    }
    let power = theta.max(0.0) / 2.0;
    let h = |e: f64| e - c * e.powf(power) - b - k;
    // h is convex on [0, inf) with its minimum at e_min
    let e_min = if c > 0.0 && power > 0.0 && power < 1.0 {
        (c * power).powf(1.0 / (1.0 - power))
    } else {
        0.0
    };
    if h(e_min) > 0.0 {
        return Ok(0.0);
    }
    let mut lo = e_min;
    let mut hi = (2.0 * lo).max(1.0);
    while h(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    loop {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            return Ok(lo);
        }
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupProbe {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub strictly_increasing: bool,
}

/// Action along the two-body first-harmonic family `x_1 = -x_2` of radius
/// `eps = 2^-j`, `j = 1..=j_max`. Further bodies ride far circles of their own.
pub fn collision_blowup_probe(spec: &PotentialSpec, j_max: u32) -> Result<BlowupProbe> {
    let n = spec.n_bodies();
    if n < 2 {
        return Err(OrbitError::SingleBody);
    }
    let p = spec.params();
    let layout = Layout::new(n, 2, 1);
    let n_t = default_grid_points(1);
    let f = ActionFunctional::new(spec, 2, 1, n_t)?;
    let mut epsilons = Vec::new();
    let mut values = Vec::new();
    for j in 1..=j_max as i32 {
        let eps = 2f64.powi(-j);
        let mut c = vec![0.0; layout.len()];
        for body in 0..n {
            let radius = match body {
                0 => eps,
                1 => -eps,
                _ => 2.0 * p.r2 * body as f64,
            };
            let s = layout.slot(body, 0);
            c[s] = radius;
            c[s + 3] = radius;
        }
        let lp = LoopConfiguration::new(n, 2, spec.period(), 1, c)?;
        epsilons.push(eps);
        values.push(f.value(&lp)?.value);
    }
    let strictly_increasing = values.windows(2).all(|w| w[1] > w[0]);
    Ok(BlowupProbe {
        epsilons,
        values,
        strictly_increasing,
    })
}
