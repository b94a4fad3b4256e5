//! Radial pair potentials with a strong-force core and sub-quadratic tail,
//! modulated in time with period `T/2`.
//!
//! Every pair uses the same unit-mass profile `w(r)` scaled by `m_i m_j`:
//!
//! * `w(r) = -a r^(-alpha)` for `r < r1`
//! * `w(r) = g r^theta` for `r >= r2`
//! * a cubic Hermite blend on `[r1, r2]` matching value and slope at both ends.
//!
//! The full pair potential is `V_ij(t, xi) = mu(t) m_i m_j w(|xi|)` with
//! `mu(t) = 1 + eps cos(4 pi t / T)`, so `V_ij(t + T/2, -xi) = V_ij(t, xi)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{OrbitError, Result};

/// Interpolant used on `[r1, r2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Blend {
    /// C1 cubic Hermite; the only admissible choice for solving.
    #[default]
    Hermite,
    /// Straight line between the endpoint values. Only C0: exists so the C1
    /// ledger check has something to catch.
    Linear,
}

/// Scalar parameters of the potential family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialParams {
    pub a: f64,
    pub g: f64,
    pub alpha: f64,
    pub theta: f64,
    pub r1: f64,
    pub r2: f64,
    pub modulation_eps: f64,
    pub blend: Blend,
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            g: 1.0,
            alpha: 2.0,
            theta: 1.0,
            r1: 1.0,
            r2: 2.0,
            modulation_eps: 0.0,
            blend: Blend::Hermite,
        }
    }
}

impl PotentialParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(OrbitError::InvalidPotential(msg));
        let all = [
            self.a,
            self.g,
            self.alpha,
            self.theta,
            self.r1,
            self.r2,
            self.modulation_eps,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("all parameters must be finite".into());
        }
        if self.a <= 0.0 {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if self.g <= 0.0 {
            return bad(format!("g must be positive, got {}", self.g));
        }
        if self.alpha < 2.0 {
            return bad(format!(
                "alpha = {} violates the strong-force hypothesis alpha >= 2",
                self.alpha
            ));
        }
        if self.theta >= 2.0 {
            return bad(format!(
                "theta = {} violates the sub-quadratic growth hypothesis theta < 2",
                self.theta
            ));
        }
        if !(self.r1 > 0.0 && self.r2 > self.r1) {
            return bad(format!(
                "need 0 < r1 < r2, got r1 = {}, r2 = {}",
                self.r1, self.r2
            ));
        }
        if !(0.0..1.0).contains(&self.modulation_eps) {
            return bad(format!(
                "modulation_eps must lie in [0, 1), got {}",
                self.modulation_eps
            ));
        }
        Ok(())
    }
}

/// Cubic on `[r1, r2]` in the local variable `s = (r - r1) / (r2 - r1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cubic {
    c: [f64; 4],
}

impl Cubic {
    fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, width: f64) -> Self {
        let (m0, m1) = (d0 * width, d1 * width);
        Self {
            c: [
                y0,
                m0,
                -3.0 * y0 - 2.0 * m0 + 3.0 * y1 - m1,
                2.0 * y0 + m0 - 2.0 * y1 + m1,
            ],
        }
    }

    fn linear(y0: f64, y1: f64) -> Self {
        Self {
            c: [y0, y1 - y0, 0.0, 0.0],
        }
    }

    fn value(&self, s: f64) -> f64 {
        let c = &self.c;
        c[0] + s * (c[1] + s * (c[2] + s * c[3]))
    }

    /// Derivative with respect to `s`.
    fn slope(&self, s: f64) -> f64 {
        let c = &self.c;
        c[1] + s * (2.0 * c[2] + s * 3.0 * c[3])
    }

    /// Interior stationary points in `(0, 1)`.
    fn stationary_points(&self) -> Vec<f64> {
        let (a, b, c) = (3.0 * self.c[3], 2.0 * self.c[2], self.c[1]);
        let mut out = Vec::new();
        if a.abs() < 1e-300 {
            if b.abs() > 1e-300 {
                out.push(-c / b);
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                out.push((-b + sq) / (2.0 * a));
                out.push((-b - sq) / (2.0 * a));
            }
        }
        out.retain(|s| *s > 0.0 && *s < 1.0);
        out
    }
}

/// Validated potential together with the masses and period it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    params: PotentialParams,
    masses: Vec<f64>,
    period: f64,
    blend: Cubic,
}

impl PotentialSpec {
    pub fn new(params: PotentialParams, masses: Vec<f64>, period: f64) -> Result<Self> {
        params.validate()?;
        if masses.is_empty() {
            return Err(OrbitError::InvalidPotential("need at least one mass".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(OrbitError::InvalidPotential(
                "masses must be positive and finite".into(),
            ));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(OrbitError::InvalidPotential(format!(
                "period must be positive, got {period}"
            )));
        }
        let p = &params;
        let y0 = -p.a * p.r1.powf(-p.alpha);
        let d0 = p.a * p.alpha * p.r1.powf(-p.alpha - 1.0);
        let y1 = p.g * p.r2.powf(p.theta);
        let d1 = p.g * p.theta * p.r2.powf(p.theta - 1.0);
        let blend = match p.blend {
            Blend::Hermite => Cubic::hermite(y0, d0, y1, d1, p.r2 - p.r1),
            Blend::Linear => Cubic::linear(y0, y1),
        };
        Ok(Self {
            params,
            masses,
            period,
            blend,
        })
    }

    /// Equal unit masses.
    pub fn uniform(params: PotentialParams, n_bodies: usize, period: f64) -> Result<Self> {
        Self::new(params, vec![1.0; n_bodies], period)
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn n_bodies(&self) -> usize {
        self.masses.len()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Time modulation `mu(t) = 1 + eps cos(4 pi t / T)`.
    #[inline]
    pub fn modulation(&self, t: f64) -> f64 {
        1.0 + self.params.modulation_eps * (4.0 * PI * t / self.period).cos()
    }

    /// Unit-mass radial profile and its derivative, `(w(r), w'(r))`.
    #[inline]
    pub fn profile(&self, r: f64) -> (f64, f64) {
        let p = &self.params;
        if r < p.r1 {
            let v = -p.a * r.powf(-p.alpha);
            (v, -p.alpha * v / r)
        } else if r >= p.r2 {
            let v = p.g * r.powf(p.theta);
            (v, p.theta * v / r)
        } else {
            let width = p.r2 - p.r1;
            let s = (r - p.r1) / width;
            (self.blend.value(s), self.blend.slope(s) / width)
        }
    }

    /// `w(s + delta) - w(s)` without cancellation for small `delta`, which the
    /// caller must supply accurately (not as a difference of two radii).
    pub fn profile_increment(&self, s: f64, delta: f64) -> f64 {
        let p = &self.params;
        let r = s + delta;
        let region = |x: f64| {
            if x < p.r1 {
                0
            } else if x >= p.r2 {
                2
            } else {
                1
            }
        };
        if region(r) != region(s) {
            return self.profile(r).0 - self.profile(s).0;
        }
        match region(s) {
            0 => -p.a * s.powf(-p.alpha) * (-p.alpha * (delta / s).ln_1p()).exp_m1(),
            2 => p.g * s.powf(p.theta) * (p.theta * (delta / s).ln_1p()).exp_m1(),
            _ => {
                let width = p.r2 - p.r1;
                let (u, v) = ((s - p.r1) / width, (r - p.r1) / width);
                let c = &self.blend.c;
                (delta / width) * (c[1] + c[2] * (u + v) + c[3] * (u * u + u * v + v * v))
            }
        }
    }

    /// Slope of the blend at its left (`s = 0`) and right (`s = 1`) ends.
    pub fn blend_end_slopes(&self) -> (f64, f64) {
        let width = self.params.r2 - self.params.r1;
        (self.blend.slope(0.0) / width, self.blend.slope(1.0) / width)
    }

    /// Value of the blend at its two ends.
    pub fn blend_end_values(&self) -> (f64, f64) {
        (self.blend.value(0.0), self.blend.value(1.0))
    }

    /// `max |w(r)|` over `r` in `[lo, r2]`; checks the blend's stationary points.
    pub fn max_abs_profile(&self, lo: f64) -> f64 {
        let p = &self.params;
        let mut best = self.profile(lo).0.abs().max(self.profile(p.r2).0.abs());
        if lo < p.r1 {
            best = best.max(self.profile(p.r1).0.abs());
        }
        let width = p.r2 - p.r1;
        for s in self.blend.stationary_points() {
            let r = p.r1 + s * width;
            if r >= lo {
                best = best.max(self.blend.value(s).abs());
            }
        }
        best
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.masses.len();
        if i >= n || j >= n {
            return Err(OrbitError::ShapeMismatch(format!(
                "pair ({i}, {j}) out of range for {n} bodies"
            )));
        }
        if i == j {
            return Err(OrbitError::SelfPair(i));
        }
        Ok(())
    }

    pub fn pair_potential(&self, t: f64, i: usize, j: usize, r: f64) -> Result<f64> {
        self.check_pair(i, j)?;
        if !(r > 0.0) {
            return Err(OrbitError::NonPositiveSeparation(r));
        }
        Ok(self.modulation(t) * self.masses[i] * self.masses[j] * self.profile(r).0)
    }

    /// `grad_xi V_ij(t, xi)`.
    pub fn pair_force(&self, t: f64, i: usize, j: usize, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_pair(i, j)?;
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(r > 0.0) {
            return Err(OrbitError::NonPositiveSeparation(r));
        }
        let scale = self.modulation(t) * self.masses[i] * self.masses[j] * self.profile(r).1 / r;
        Ok(xi.iter().map(|x| scale * x).collect())
    }

    /// `V(t, x) = 1/2 sum_{i != j} V_ij(t, x_i - x_j)`; positions flattened `N x k`.
    pub fn total_potential(&self, t: f64, positions: &[f64]) -> Result<f64> {
        self.potential_and_gradient(t, positions, None)
    }

    /// Total potential, accumulating `grad_{x_i} V` into `grad` when given.
    pub fn potential_and_gradient(
        &self,
        t: f64,
        positions: &[f64],
        mut grad: Option<&mut [f64]>,
    ) -> Result<f64> {
        let n = self.masses.len();
        if n == 0 || positions.len() % n != 0 {
            return Err(OrbitError::ShapeMismatch(format!(
                "{} position entries for {n} bodies",
                positions.len()
            )));
        }
        let k = positions.len() / n;
        let mu = self.modulation(t);
        let mut total = 0.0;
        let mut xi = vec![0.0; k];
        for i in 0..n {
            for j in i + 1..n {
                let mut r2 = 0.0;
                for d in 0..k {
                    xi[d] = positions[i * k + d] - positions[j * k + d];
                    r2 += xi[d] * xi[d];
                }
                let r = r2.sqrt();
                if r == 0.0 {
                    return Err(OrbitError::CollisionSample { node: 0, i, j });
                }
                let mm = mu * self.masses[i] * self.masses[j];
                let (w, dw) = self.profile(r);
                total += mm * w;
                if let Some(g) = grad.as_deref_mut() {
                    let s = mm * dw / r;
                    for d in 0..k {
                        g[i * k + d] += s * xi[d];
                        g[j * k + d] -= s * xi[d];
                    }
                }
            }
        }
        Ok(total)
    }

    /// Strong-force witness for the pair `(i, j)`, rescaled by `sqrt(1 - eps)` so it
    /// is valid at every time.
    pub fn witness(&self, i: usize, j: usize) -> Result<StrongForceWitness> {
        self.check_pair(i, j)?;
        let p = &self.params;
        let strength = (1.0 - p.modulation_eps) * p.a * self.masses[i] * self.masses[j];
        let form = if p.alpha == 2.0 {
            WitnessForm::Logarithmic {
                coef: strength.sqrt(),
            }
        } else {
            let beta = (p.alpha - 2.0) / 2.0;
            WitnessForm::Power {
                c: strength.sqrt() / beta,
                beta,
            }
        };
        Ok(StrongForceWitness {
            form,
            radius: p.r1,
        })
    }

    /// `min_t (-V_ij(t, r)) - |U'(r)|^2` for `0 < r < r1`.
    pub fn strong_force_margin(&self, i: usize, j: usize, r: f64) -> Result<f64> {
        let witness = self.witness(i, j)?;
        if !(r > 0.0 && r < self.params.r1) {
            return Err(OrbitError::OutOfWitnessRange {
                r,
                r1: self.params.r1,
            });
        }
        // -V = mu(t) m_i m_j a r^-alpha is smallest where mu = 1 - eps.
        let min_mu = 1.0 - self.params.modulation_eps;
        let neg_v = -min_mu * self.masses[i] * self.masses[j] * self.profile(r).0;
        Ok(neg_v - witness.gradient(r).powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessForm {
    /// `U(r) = coef * ln r`
    Logarithmic { coef: f64 },
    /// `U(r) = -c r^(-beta)`
    Power { c: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongForceWitness {
    pub form: WitnessForm,
    /// Witness is only claimed on `(0, radius)`.
    pub radius: f64,
}

impl StrongForceWitness {
    pub fn value(&self, r: f64) -> f64 {
        match self.form {
            WitnessForm::Logarithmic { coef } => coef * r.ln(),
            WitnessForm::Power { c, beta } => -c * r.powf(-beta),
        }
    }

    /// `U'(r)`; the gradient of `U(|xi|)` has this magnitude.
    pub fn gradient(&self, r: f64) -> f64 {
        match self.form {
            WitnessForm::Logarithmic { coef } => coef / r,
            WitnessForm::Power { c, beta } => c * beta * r.powf(-beta - 1.0),
        }
    }
}
