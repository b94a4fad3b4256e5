//! Loops in the antiperiodic space: every body is a finite sum of odd
//! harmonics, so `x(t + T/2) = -x(t)` and the zero-mean property hold by
//! construction rather than by penalty.
//!
//! Coefficients are stored flat, body-major and harmonic-minor, with the
//! cosine vector of a harmonic before its sine vector:
//!
//! ```text
//! index(body, h, part, d) = ((body * M + h) * 2 + part) * k + d
//! ```
//!
//! where harmonic slot `h` carries the odd frequency `2h + 1` and `part` is
//! 0 for cosine, 1 for sine. Gradients use the same layout.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{OrbitError, Result};

/// Cosine or sine half of a harmonic slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Cos = 0,
    Sin = 1,
}

/// Shape of a flattened coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_bodies: usize,
    pub dim: usize,
    pub harmonics: usize,
}

impl Layout {
    pub fn new(n_bodies: usize, dim: usize, harmonics: usize) -> Self {
        Self {
            n_bodies,
            dim,
            harmonics,
        }
    }

    pub fn len(&self) -> usize {
        self.n_bodies * self.harmonics * 2 * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, body: usize, h: usize, part: Part, d: usize) -> usize {
        ((body * self.harmonics + h) * 2 + part as usize) * self.dim + d
    }

    /// Offset of the cosine vector of `(body, h)`; the sine vector follows at `+ dim`.
    #[inline]
    pub fn slot(&self, body: usize, h: usize) -> usize {
        (body * self.harmonics + h) * 2 * self.dim
    }
}

/// Odd frequency carried by harmonic slot `h`.
#[inline]
pub fn odd_harmonic(h: usize) -> usize {
    2 * h + 1
}

/// Smallest grid that integrates products of two loop harmonics exactly.
pub fn min_grid_points(harmonics: usize) -> usize {
    4 * harmonics + 1
}

pub fn default_grid_points(harmonics: usize) -> usize {
    4 * harmonics + 9
}

pub(crate) fn check_grid(harmonics: usize, n_t: usize) -> Result<()> {
    let min = min_grid_points(harmonics);
    if n_t < min {
        return Err(OrbitError::GridTooCoarse {
            n_t,
            harmonics,
            min,
        });
    }
    Ok(())
}

/// An N-body loop truncated to `M` odd harmonics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopRepr", into = "LoopRepr")]
pub struct LoopConfiguration {
    layout: Layout,
    period: f64,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopRepr {
    #[serde(rename = "N")]
    n_bodies: usize,
    k: usize,
    #[serde(rename = "T")]
    period: f64,
    #[serde(rename = "M")]
    harmonics: usize,
    coefficients: Vec<f64>,
}

impl TryFrom<LoopRepr> for LoopConfiguration {
    type Error = OrbitError;

    fn try_from(r: LoopRepr) -> Result<Self> {
        LoopConfiguration::new(r.n_bodies, r.k, r.period, r.harmonics, r.coefficients)
    }
}

impl From<LoopConfiguration> for LoopRepr {
    fn from(l: LoopConfiguration) -> Self {
        LoopRepr {
            n_bodies: l.layout.n_bodies,
            k: l.layout.dim,
            period: l.period,
            harmonics: l.layout.harmonics,
            coefficients: l.coefficients,
        }
    }
}

impl LoopConfiguration {
    pub fn new(
        n_bodies: usize,
        dim: usize,
        period: f64,
        harmonics: usize,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if n_bodies == 0 {
            return Err(OrbitError::InvalidLoop("need at least one body".into()));
        }
        if dim == 0 {
            return Err(OrbitError::InvalidLoop("dimension must be positive".into()));
        }
        if harmonics == 0 {
            return Err(OrbitError::InvalidLoop(
                "need at least one harmonic (M >= 1)".into(),
            ));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(OrbitError::InvalidLoop(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let layout = Layout::new(n_bodies, dim, harmonics);
        if coefficients.len() != layout.len() {
            return Err(OrbitError::InvalidLoop(format!(
                "expected {} coefficients for N={n_bodies}, k={dim}, M={harmonics}, got {}",
                layout.len(),
                coefficients.len()
            )));
        }
        if let Some(pos) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(OrbitError::InvalidLoop(format!(
                "coefficient {pos} is not finite"
            )));
        }
        Ok(Self {
            layout,
            period,
            coefficients,
        })
    }

    pub fn zeros(n_bodies: usize, dim: usize, period: f64, harmonics: usize) -> Result<Self> {
        let len = Layout::new(n_bodies, dim, harmonics).len();
        Self::new(n_bodies, dim, period, harmonics, vec![0.0; len])
    }

    /// Same shape, new coefficients.
    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(
            self.layout.n_bodies,
            self.layout.dim,
            self.period,
            self.layout.harmonics,
            coefficients,
        )
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_bodies(&self) -> usize {
        self.layout.n_bodies
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn harmonics(&self) -> usize {
        self.layout.harmonics
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn cos_coeffs(&self, body: usize, h: usize) -> &[f64] {
        let s = self.layout.slot(body, h);
        &self.coefficients[s..s + self.layout.dim]
    }

    pub fn sin_coeffs(&self, body: usize, h: usize) -> &[f64] {
        let s = self.layout.slot(body, h) + self.layout.dim;
        &self.coefficients[s..s + self.layout.dim]
    }

    /// Angular frequency `2 pi (2h+1) / T` of harmonic slot `h`.
    pub fn angular_frequency(&self, h: usize) -> f64 {
        2.0 * PI * odd_harmonic(h) as f64 / self.period
    }

    /// Direct evaluation of `x_body(t)`.
    pub fn position(&self, body: usize, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.dim];
        for h in 0..self.layout.harmonics {
            let (s, c) = (self.angular_frequency(h) * t).sin_cos();
            for (d, o) in out.iter_mut().enumerate() {
                *o += self.cos_coeffs(body, h)[d] * c + self.sin_coeffs(body, h)[d] * s;
            }
        }
        out
    }

    /// Direct evaluation of `x_body'(t)`.
    pub fn velocity(&self, body: usize, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.dim];
        for h in 0..self.layout.harmonics {
            let w = self.angular_frequency(h);
            let (s, c) = (w * t).sin_cos();
            for (d, o) in out.iter_mut().enumerate() {
                *o += w * (-self.cos_coeffs(body, h)[d] * s + self.sin_coeffs(body, h)[d] * c);
            }
        }
        out
    }

    /// The loop `t -> x(t + shift)`; stays in the antiperiodic space.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut coefficients = self.coefficients.clone();
        let k = self.layout.dim;
        for body in 0..self.layout.n_bodies {
            for h in 0..self.layout.harmonics {
                let (s, c) = (self.angular_frequency(h) * shift).sin_cos();
                let slot = self.layout.slot(body, h);
                for d in 0..k {
                    let a = self.coefficients[slot + d];
                    let b = self.coefficients[slot + k + d];
                    coefficients[slot + d] = a * c + b * s;
                    coefficients[slot + k + d] = b * c - a * s;
                }
            }
        }
        Self {
            layout: self.layout,
            period: self.period,
            coefficients,
        }
    }

    /// Zero-pads (or truncates) to `harmonics` slots.
    pub fn with_harmonics(&self, harmonics: usize) -> Result<Self> {
        let target = Layout::new(self.layout.n_bodies, self.layout.dim, harmonics);
        let mut coefficients = vec![0.0; target.len()];
        let k = self.layout.dim;
        for body in 0..self.layout.n_bodies {
            for h in 0..harmonics.min(self.layout.harmonics) {
                let src = self.layout.slot(body, h);
                let dst = target.slot(body, h);
                coefficients[dst..dst + 2 * k].copy_from_slice(&self.coefficients[src..src + 2 * k]);
            }
        }
        Self::new(
            self.layout.n_bodies,
            self.layout.dim,
            self.period,
            harmonics,
            coefficients,
        )
    }

    /// `int_0^T |x_body|^2 dt` via Parseval.
    pub fn l2_norm_sq(&self, body: usize) -> f64 {
        (0..self.layout.harmonics)
            .map(|h| self.harmonic_energy(body, h))
            .sum::<f64>()
            * self.period
            / 2.0
    }

    /// `int_0^T |x_body'|^2 dt` via Parseval.
    pub fn velocity_l2_norm_sq(&self, body: usize) -> f64 {
        (0..self.layout.harmonics)
            .map(|h| self.angular_frequency(h).powi(2) * self.harmonic_energy(body, h))
            .sum::<f64>()
            * self.period
            / 2.0
    }

    fn harmonic_energy(&self, body: usize, h: usize) -> f64 {
        let s = self.layout.slot(body, h);
        self.coefficients[s..s + 2 * self.layout.dim]
            .iter()
            .map(|c| c * c)
            .sum()
    }
}

/// `sum_i (m_i / 2) int_0^T |x_i'|^2 dt`, in closed form.
pub fn kinetic_energy(lp: &LoopConfiguration, masses: &[f64]) -> Result<f64> {
    check_masses(lp, masses)?;
    Ok(masses
        .iter()
        .enumerate()
        .map(|(i, m)| 0.5 * m * lp.velocity_l2_norm_sq(i))
        .sum())
}

pub(crate) fn check_masses(lp: &LoopConfiguration, masses: &[f64]) -> Result<()> {
    if masses.len() != lp.n_bodies() {
        return Err(OrbitError::ShapeMismatch(format!(
            "{} masses for {} bodies",
            masses.len(),
            lp.n_bodies()
        )));
    }
    if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(OrbitError::InvalidPotential(
            "masses must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// H1 distance `(int |x-y|^2 + |x'-y'|^2)^(1/2)` over all bodies.
pub fn h1_distance(l1: &LoopConfiguration, l2: &LoopConfiguration) -> Result<f64> {
    if l1.n_bodies() != l2.n_bodies() || l1.dim() != l2.dim() {
        return Err(OrbitError::ShapeMismatch(format!(
            "N={}, k={} vs N={}, k={}",
            l1.n_bodies(),
            l1.dim(),
            l2.n_bodies(),
            l2.dim()
        )));
    }
    if l1.period() != l2.period() {
        return Err(OrbitError::ShapeMismatch(format!(
            "period {} vs {}",
            l1.period(),
            l2.period()
        )));
    }
    let m = l1.harmonics().max(l2.harmonics());
    let a = l1.with_harmonics(m)?;
    let b = l2.with_harmonics(m)?;
    let diff: Vec<f64> = a
        .coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| x - y)
        .collect();
    let d = a.with_coefficients(diff)?;
    let total: f64 = (0..d.n_bodies())
        .map(|i| d.l2_norm_sq(i) + d.velocity_l2_norm_sq(i))
        .sum();
    Ok(total.sqrt())
}

/// Cosine and sine of every loop harmonic at every node of a uniform grid.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    n_t: usize,
    harmonics: usize,
    period: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierBasis {
    pub fn new(harmonics: usize, n_t: usize, period: f64) -> Result<Self> {
        check_grid(harmonics, n_t)?;
        let mut cos = Vec::with_capacity(n_t * harmonics);
        let mut sin = Vec::with_capacity(n_t * harmonics);
        for j in 0..n_t {
            for h in 0..harmonics {
                // reduce the phase index so large harmonics keep full accuracy
                let phase = (odd_harmonic(h) * j) % n_t;
                let (s, c) = (2.0 * PI * phase as f64 / n_t as f64).sin_cos();
                cos.push(c);
                sin.push(s);
            }
        }
        Ok(Self {
            n_t,
            harmonics,
            period,
            cos,
            sin,
        })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.period / self.n_t as f64
    }

    /// Trapezoidal weight `T / n_t` of every node.
    pub fn weight(&self) -> f64 {
        self.period / self.n_t as f64
    }

    #[inline]
    pub fn cos(&self, j: usize, h: usize) -> f64 {
        self.cos[j * self.harmonics + h]
    }

    #[inline]
    pub fn sin(&self, j: usize, h: usize) -> f64 {
        self.sin[j * self.harmonics + h]
    }
}

/// Positions, velocities and accelerations on a uniform grid over `[0, T)`.
/// Arrays are flattened `n_t x N x k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub n_bodies: usize,
    pub dim: usize,
    pub period: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub accelerations: Vec<f64>,
}

impl SampledPath {
    pub fn n_t(&self) -> usize {
        self.times.len()
    }

    fn offset(&self, j: usize, body: usize) -> usize {
        (j * self.n_bodies + body) * self.dim
    }

    pub fn position(&self, j: usize, body: usize) -> &[f64] {
        let o = self.offset(j, body);
        &self.positions[o..o + self.dim]
    }

    pub fn velocity(&self, j: usize, body: usize) -> &[f64] {
        let o = self.offset(j, body);
        &self.velocities[o..o + self.dim]
    }

    pub fn acceleration(&self, j: usize, body: usize) -> &[f64] {
        let o = self.offset(j, body);
        &self.accelerations[o..o + self.dim]
    }

    /// All body positions at node `j`, flattened `N x k`.
    pub fn snapshot(&self, j: usize) -> &[f64] {
        let o = self.offset(j, 0);
        &self.positions[o..o + self.n_bodies * self.dim]
    }
}

pub fn sample_trajectory(lp: &LoopConfiguration, n_t: usize) -> Result<SampledPath> {
    let basis = FourierBasis::new(lp.harmonics(), n_t, lp.period())?;
    Ok(sample_with_basis(lp, &basis))
}

pub(crate) fn sample_with_basis(lp: &LoopConfiguration, basis: &FourierBasis) -> SampledPath {
    let (n, k, m) = (lp.n_bodies(), lp.dim(), lp.harmonics());
    let n_t = basis.n_t();
    let mut positions = vec![0.0; n_t * n * k];
    let mut velocities = vec![0.0; n_t * n * k];
    let mut accelerations = vec![0.0; n_t * n * k];
    let freqs: Vec<f64> = (0..m).map(|h| lp.angular_frequency(h)).collect();
    for j in 0..n_t {
        for i in 0..n {
            let o = (j * n + i) * k;
            for (h, &w) in freqs.iter().enumerate() {
                let (c, s) = (basis.cos(j, h), basis.sin(j, h));
                let a = lp.cos_coeffs(i, h);
                let b = lp.sin_coeffs(i, h);
                for d in 0..k {
                    let x = a[d] * c + b[d] * s;
                    positions[o + d] += x;
                    velocities[o + d] += w * (b[d] * c - a[d] * s);
                    accelerations[o + d] -= w * w * x;
                }
            }
        }
    }
    SampledPath {
        n_bodies: n,
        dim: k,
        period: lp.period(),
        times: (0..n_t).map(|j| basis.time(j)).collect(),
        positions,
        velocities,
        accelerations,
    }
}

pub fn min_pairwise_distance(path: &SampledPath) -> Result<f64> {
    if path.n_bodies < 2 {
        return Err(OrbitError::SingleBody);
    }
    let mut best = f64::INFINITY;
    for j in 0..path.n_t() {
        for i in 0..path.n_bodies {
            for l in i + 1..path.n_bodies {
                best = best.min(distance(path.position(j, i), path.position(j, l)));
            }
        }
    }
    Ok(best)
}

#[inline]
pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_circle() -> LoopConfiguration {
        // a = (1, 0), b = (0, 1): x(t) = (cos t, sin t) for T = 2 pi
        LoopConfiguration::new(1, 2, 2.0 * PI, 1, vec![1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    fn random_loop(rng: &mut ChaCha8Rng, n: usize, k: usize, m: usize, period: f64) -> LoopConfiguration {
        let len = Layout::new(n, k, m).len();
        let c = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        LoopConfiguration::new(n, k, period, m, c).unwrap()
    }

    fn naive_position(lp: &LoopConfiguration, body: usize, t: f64) -> Vec<f64> {
        let mut x = vec![0.0; lp.dim()];
        for h in 0..lp.harmonics() {
            let w = 2.0 * PI * (2 * h + 1) as f64 / lp.period();
            for d in 0..lp.dim() {
                x[d] += lp.cos_coeffs(body, h)[d] * (w * t).cos();
                x[d] += lp.sin_coeffs(body, h)[d] * (w * t).sin();
            }
        }
        x
    }

    #[test]
    fn layout_is_body_major_cosine_first() {
        let l = Layout::new(2, 3, 4);
        assert_eq!(l.index(0, 0, Part::Cos, 0), 0);
        assert_eq!(l.index(0, 0, Part::Sin, 0), 3);
        assert_eq!(l.index(0, 1, Part::Cos, 2), 8);
        assert_eq!(l.index(1, 0, Part::Cos, 0), 24);
        assert_eq!(l.len(), 48);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(LoopConfiguration::new(1, 2, 1.0, 0, vec![]).is_err());
        assert!(LoopConfiguration::new(1, 2, 1.0, 1, vec![0.0; 3]).is_err());
        assert!(LoopConfiguration::new(1, 2, -1.0, 1, vec![0.0; 4]).is_err());
        assert!(LoopConfiguration::new(1, 2, 1.0, 1, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_loop_samples_to_zero() {
        let lp = LoopConfiguration::zeros(3, 2, 1.0, 4).unwrap();
        let p = sample_trajectory(&lp, 25).unwrap();
        assert!(p.positions.iter().all(|&x| x == 0.0));
        assert!(p.velocities.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn first_harmonic_is_antiperiodic() {
        let lp = unit_circle();
        let x0 = lp.position(0, 0.0);
        let xh = lp.position(0, PI);
        assert_relative_eq!(x0[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(x0[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(xh[0], -1.0, epsilon = 1e-15);
        assert!(xh[1].abs() < 1e-15);
    }

    #[test]
    fn grid_too_coarse() {
        let lp = LoopConfiguration::zeros(1, 2, 1.0, 8).unwrap();
        assert_eq!(
            sample_trajectory(&lp, 32),
            Err(OrbitError::GridTooCoarse {
                n_t: 32,
                harmonics: 8,
                min: 33
            })
        );
        assert!(sample_trajectory(&lp, 33).is_ok());
    }

    #[test]
    fn sampling_matches_naive_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let lp = random_loop(&mut rng, 3, 2, 8, 2.7);
            let n_t = default_grid_points(8);
            let p = sample_trajectory(&lp, n_t).unwrap();
            for j in 0..n_t {
                for i in 0..3 {
                    let x = naive_position(&lp, i, p.times[j]);
                    for d in 0..2 {
                        assert!((p.position(j, i)[d] - x[d]).abs() < 1e-12);
                    }
                    let v = lp.velocity(i, p.times[j]);
                    for d in 0..2 {
                        assert!((p.velocity(j, i)[d] - v[d]).abs() < 1e-11 * (1.0 + v[d].abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn kinetic_energy_of_unit_circle() {
        let lp = unit_circle();
        assert_relative_eq!(kinetic_energy(&lp, &[1.0]).unwrap(), PI, max_relative = 1e-15);
        let zero = LoopConfiguration::zeros(2, 3, 1.0, 3).unwrap();
        assert_eq!(kinetic_energy(&zero, &[1.0, 2.0]).unwrap(), 0.0);
        assert!(kinetic_energy(&lp, &[0.0]).is_err());
        assert!(kinetic_energy(&lp, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn kinetic_energy_matches_trapezoid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = rng.gen_range(1..10);
            let lp = random_loop(&mut rng, 2, 3, m, 1.3);
            let masses = [0.7, 1.9];
            let n_t = default_grid_points(m);
            let p = sample_trajectory(&lp, n_t).unwrap();
            let mut quad = 0.0;
            for j in 0..n_t {
                for (i, mass) in masses.iter().enumerate() {
                    let v2: f64 = p.velocity(j, i).iter().map(|v| v * v).sum();
                    quad += 0.5 * mass * v2;
                }
            }
            quad *= lp.period() / n_t as f64;
            let closed = kinetic_energy(&lp, &masses).unwrap();
            assert_relative_eq!(closed, quad, max_relative = 1e-10);
        }
    }

    #[test]
    fn min_distance_cases() {
        // x2 = -x1 on the unit circle
        let c = vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        let lp = LoopConfiguration::new(2, 2, 2.0 * PI, 1, c).unwrap();
        let p = sample_trajectory(&lp, 13).unwrap();
        assert_relative_eq!(min_pairwise_distance(&p).unwrap(), 2.0, max_relative = 1e-14);

        let same = LoopConfiguration::new(2, 2, 1.0, 1, vec![0.3, 0.1, 0.2, 0.5, 0.3, 0.1, 0.2, 0.5]).unwrap();
        let p = sample_trajectory(&same, 5).unwrap();
        assert_eq!(min_pairwise_distance(&p).unwrap(), 0.0);

        let single = sample_trajectory(&unit_circle(), 5).unwrap();
        assert_eq!(min_pairwise_distance(&single), Err(OrbitError::SingleBody));
    }

    #[test]
    fn min_distance_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lp = random_loop(&mut rng, 4, 3, 3, 1.0);
        let n_t = 21;
        let mut brute = f64::INFINITY;
        for j in 0..n_t {
            let t = j as f64 / n_t as f64;
            for i in 0..4 {
                for l in 0..4 {
                    if i != l {
                        let xi = naive_position(&lp, i, t);
                        let xl = naive_position(&lp, l, t);
                        brute = brute.min(distance(&xi, &xl));
                    }
                }
            }
        }
        let p = sample_trajectory(&lp, n_t).unwrap();
        assert_relative_eq!(min_pairwise_distance(&p).unwrap(), brute, max_relative = 1e-12);
    }

    #[test]
    fn h1_single_harmonic() {
        let base = LoopConfiguration::zeros(1, 2, 2.0 * PI, 2).unwrap();
        let mut c = base.coefficients().to_vec();
        c[0] = 0.3;
        c[1] = -0.4;
        let other = base.with_coefficients(c).unwrap();
        let d = h1_distance(&base, &other).unwrap();
        assert_relative_eq!(d, 0.5 * (2.0 * PI).sqrt(), max_relative = 1e-14);
        assert_eq!(h1_distance(&other, &other).unwrap(), 0.0);
    }

    #[test]
    fn h1_zero_pads_and_rejects_mismatch() {
        let a = unit_circle();
        let b = a.with_harmonics(5).unwrap();
        assert_eq!(h1_distance(&a, &b).unwrap(), 0.0);
        let c = LoopConfiguration::zeros(1, 3, 2.0 * PI, 1).unwrap();
        assert!(matches!(h1_distance(&a, &c), Err(OrbitError::ShapeMismatch(_))));
        let d = LoopConfiguration::zeros(1, 2, 1.0, 1).unwrap();
        assert!(matches!(h1_distance(&a, &d), Err(OrbitError::ShapeMismatch(_))));
    }

    #[test]
    fn h1_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_loop(&mut rng, 2, 2, 3, 1.7);
        let b = random_loop(&mut rng, 2, 2, 3, 1.7);
        let n_t = 401;
        let (pa, pb) = (sample_trajectory(&a, n_t).unwrap(), sample_trajectory(&b, n_t).unwrap());
        let mut quad = 0.0;
        for j in 0..n_t {
            for i in 0..2 {
                let dx = distance(pa.position(j, i), pb.position(j, i));
                let dv = distance(pa.velocity(j, i), pb.velocity(j, i));
                quad += dx * dx + dv * dv;
            }
        }
        quad *= 1.7 / n_t as f64;
        assert_relative_eq!(h1_distance(&a, &b).unwrap(), quad.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lp = random_loop(&mut rng, 2, 2, 4, 3.0);
        let s = 0.37;
        let shifted = lp.shifted(s);
        for t in [0.0, 0.4, 1.1, 2.9] {
            let a = shifted.position(1, t);
            let b = lp.position(1, t + s);
            for d in 0..2 {
                assert!((a[d] - b[d]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn deserialization_validates() {
        let ok = r#"{"N":1,"k":2,"T":6.283185307179586,"M":1,"coefficients":[1.0,0.0,0.0,1.0]}"#;
        let lp: LoopConfiguration = serde_json::from_str(ok).unwrap();
        assert_eq!(lp, unit_circle());
        let bad = r#"{"N":1,"k":2,"T":1.0,"M":1,"coefficients":[1.0]}"#;
        assert!(serde_json::from_str::<LoopConfiguration>(bad).is_err());
    }
}
