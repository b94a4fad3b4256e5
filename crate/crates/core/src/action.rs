//! The discretized Lagrangian action
//!
//! ```text
//! f(x) = sum_i (m_i/2) int_0^T |x_i'|^2 dt  -  int_0^T V(t, x(t)) dt
//! ```
//!
//! with the kinetic term in closed form and the potential term by the
//! trapezoidal rule on a uniform grid. The gradient is the exact gradient of
//! this discrete functional, so finite differences of [`action`] reproduce
//! [`action_gradient`] up to rounding.

use crate::error::{OrbitError, Result};
use crate::loopspace::{self, FourierBasis, LoopConfiguration};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ActionEvaluation {
    pub value: f64,
    /// Same layout as [`LoopConfiguration::coefficients`].
    pub gradient: Vec<f64>,
    pub kinetic: f64,
    pub potential_integral: f64,
    pub min_separation: f64,
}

impl ActionEvaluation {
    pub fn grad_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Reusable evaluator for one `(spec, shape, grid)` combination.
#[derive(Debug, Clone)]
pub struct ActionFunctional<'a> {
    spec: &'a PotentialSpec,
    basis: FourierBasis,
    dim: usize,
}

impl<'a> ActionFunctional<'a> {
    pub fn new(spec: &'a PotentialSpec, dim: usize, harmonics: usize, n_t: usize) -> Result<Self> {
        let basis = FourierBasis::new(harmonics, n_t, spec.period())?;
        Ok(Self { spec, basis, dim })
    }

    pub fn for_loop(spec: &'a PotentialSpec, lp: &LoopConfiguration, n_t: usize) -> Result<Self> {
        Self::new(spec, lp.dim(), lp.harmonics(), n_t)
    }

    pub fn spec(&self) -> &PotentialSpec {
        self.spec
    }

    pub fn n_t(&self) -> usize {
        self.basis.n_t()
    }

    fn check(&self, lp: &LoopConfiguration) -> Result<()> {
        if lp.n_bodies() != self.spec.n_bodies() {
            return Err(OrbitError::ShapeMismatch(format!(
                "loop has {} bodies, potential has {} masses",
                lp.n_bodies(),
                self.spec.n_bodies()
            )));
        }
        if lp.dim() != self.dim || lp.harmonics() != self.basis.harmonics() {
            return Err(OrbitError::ShapeMismatch(format!(
                "loop shape k={}, M={} does not match evaluator k={}, M={}",
                lp.dim(),
                lp.harmonics(),
                self.dim,
                self.basis.harmonics()
            )));
        }
        if lp.period() != self.spec.period() {
            return Err(OrbitError::ShapeMismatch(format!(
                "loop period {} differs from potential period {}",
                lp.period(),
                self.spec.period()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, lp: &LoopConfiguration) -> Result<ActionEvaluation> {
        self.run(lp, true)
    }

    /// Value only; the gradient field is left empty.
    pub fn value(&self, lp: &LoopConfiguration) -> Result<ActionEvaluation> {
        self.run(lp, false)
    }

    /// `f(lp + step) - f(lp)` built from the increments themselves, so that
    /// changes far below the rounding level of `f` keep their sign.
    pub fn increment(&self, lp: &LoopConfiguration, step: &[f64]) -> Result<f64> {
        self.check(lp)?;
        let layout = lp.layout();
        if step.len() != layout.len() {
            return Err(OrbitError::ShapeMismatch(format!(
                "step has {} entries, loop has {}",
                step.len(),
                layout.len()
            )));
        }
        let masses = self.spec.masses();
        let (n, k, m) = (layout.n_bodies, layout.dim, layout.harmonics);
        let c = lp.coefficients();

        let mut kinetic = 0.0;
        for i in 0..n {
            for h in 0..m {
                let w = lp.angular_frequency(h);
                let slot = layout.slot(i, h);
                let sum: f64 = (slot..slot + 2 * k).map(|q| step[q] * (2.0 * c[q] + step[q])).sum();
                kinetic += 0.25 * masses[i] * lp.period() * w * w * sum;
            }
        }

        let mut x = vec![0.0; n * k];
        let mut dx = vec![0.0; n * k];
        let mut potential = 0.0;
        for j in 0..self.basis.n_t() {
            x.iter_mut().for_each(|v| *v = 0.0);
            dx.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                for h in 0..m {
                    let (cs, sn) = (self.basis.cos(j, h), self.basis.sin(j, h));
                    let slot = layout.slot(i, h);
                    for d in 0..k {
                        x[i * k + d] += c[slot + d] * cs + c[slot + k + d] * sn;
                        dx[i * k + d] += step[slot + d] * cs + step[slot + k + d] * sn;
                    }
                }
            }
            let mu = self.spec.modulation(self.basis.time(j));
            let mut node = 0.0;
            for i in 0..n {
                for l in i + 1..n {
                    let (mut r0_sq, mut r1_sq, mut dr_sq) = (0.0, 0.0, 0.0);
                    for d in 0..k {
                        let xi = x[i * k + d] - x[l * k + d];
                        let dxi = dx[i * k + d] - dx[l * k + d];
                        r0_sq += xi * xi;
                        r1_sq += (xi + dxi) * (xi + dxi);
                        dr_sq += dxi * (2.0 * xi + dxi);
                    }
                    if r0_sq == 0.0 || r1_sq == 0.0 {
                        return Err(OrbitError::CollisionSample { node: j, i, j: l });
                    }
                    let (r0, r1) = (r0_sq.sqrt(), r1_sq.sqrt());
                    let delta = dr_sq / (r0 + r1);
                    node += masses[i] * masses[l] * self.spec.profile_increment(r0, delta);
                }
            }
            potential += mu * node;
        }
        Ok(kinetic - self.basis.weight() * potential)
    }

    fn run(&self, lp: &LoopConfiguration, with_gradient: bool) -> Result<ActionEvaluation> {
        self.check(lp)?;
        let masses = self.spec.masses();
        let layout = lp.layout();
        let (n, k, m) = (layout.n_bodies, layout.dim, layout.harmonics);
        let kinetic = loopspace::kinetic_energy(lp, masses)?;

        let mut gradient = if with_gradient {
            vec![0.0; layout.len()]
        } else {
            Vec::new()
        };
        if with_gradient {
            // d/dc of (m_i/2)(T/2) w^2 |c|^2
            for i in 0..n {
                for h in 0..m {
                    let w = lp.angular_frequency(h);
                    let scale = masses[i] * 0.5 * lp.period() * w * w;
                    let s = layout.slot(i, h);
                    for q in s..s + 2 * k {
                        gradient[q] = scale * lp.coefficients()[q];
                    }
                }
            }
        }

        let weight = self.basis.weight();
        let mut positions = vec![0.0; n * k];
        let mut force = vec![0.0; n * k];
        let mut potential_integral = 0.0;
        let mut min_separation = f64::INFINITY;
        for j in 0..self.basis.n_t() {
            positions.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..n {
                for h in 0..m {
                    let (c, s) = (self.basis.cos(j, h), self.basis.sin(j, h));
                    let a = lp.cos_coeffs(i, h);
                    let b = lp.sin_coeffs(i, h);
                    for d in 0..k {
                        positions[i * k + d] += a[d] * c + b[d] * s;
                    }
                }
            }
            for i in 0..n {
                for l in i + 1..n {
                    let r = loopspace::distance(&positions[i * k..(i + 1) * k], &positions[l * k..(l + 1) * k]);
                    if r == 0.0 {
                        return Err(OrbitError::CollisionSample { node: j, i, j: l });
                    }
                    min_separation = min_separation.min(r);
                }
            }
            let t = self.basis.time(j);
            let v = if with_gradient {
                force.iter_mut().for_each(|f| *f = 0.0);
                self.spec.potential_and_gradient(t, &positions, Some(&mut force))?
            } else {
                self.spec.potential_and_gradient(t, &positions, None)?
            };
            potential_integral += weight * v;
            if with_gradient {
                // chain rule through x_i(t_j) = sum_h a cos + b sin
                for i in 0..n {
                    for h in 0..m {
                        let (c, s) = (self.basis.cos(j, h), self.basis.sin(j, h));
                        let slot = layout.slot(i, h);
                        for d in 0..k {
                            let f = weight * force[i * k + d];
                            gradient[slot + d] -= f * c;
                            gradient[slot + k + d] -= f * s;
                        }
                    }
                }
            }
        }
        if n < 2 {
            min_separation = f64::INFINITY;
        }
        Ok(ActionEvaluation {
            value: kinetic - potential_integral,
            gradient,
            kinetic,
            potential_integral,
            min_separation,
        })
    }
}

/// Action value, its pieces and its gradient.
pub fn action(spec: &PotentialSpec, lp: &LoopConfiguration, n_t: usize) -> Result<ActionEvaluation> {
    ActionFunctional::for_loop(spec, lp, n_t)?.evaluate(lp)
}

pub fn action_gradient(spec: &PotentialSpec, lp: &LoopConfiguration, n_t: usize) -> Result<Vec<f64>> {
    Ok(action(spec, lp, n_t)?.gradient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopspace::{default_grid_points, Layout};
    use crate::potential::PotentialParams;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn opposite_circles(radius: f64, harmonics: usize) -> LoopConfiguration {
        let layout = Layout::new(2, 2, harmonics);
        let mut c = vec![0.0; layout.len()];
        c[layout.slot(0, 0)] = radius;
        c[layout.slot(0, 0) + 3] = radius;
        c[layout.slot(1, 0)] = -radius;
        c[layout.slot(1, 0) + 3] = -radius;
        LoopConfiguration::new(2, 2, 2.0 * PI, harmonics, c).unwrap()
    }

    #[test]
    fn single_body_action_is_kinetic() {
        let spec = PotentialSpec::uniform(PotentialParams::default(), 1, 2.0 * PI).unwrap();
        let lp = LoopConfiguration::new(1, 2, 2.0 * PI, 1, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let ev = action(&spec, &lp, 13).unwrap();
        assert_relative_eq!(ev.value, PI, max_relative = 1e-15);
        assert_eq!(ev.potential_integral, 0.0);
    }

    #[test]
    fn opposite_circles_match_dense_quadrature() {
        let spec = PotentialSpec::uniform(PotentialParams::default(), 2, 2.0 * PI).unwrap();
        let lp = opposite_circles(1.0, 2);
        let ev = action(&spec, &lp, default_grid_points(2)).unwrap();
        // kinetic 2 pi, separation 2 >= r2 so V = g * 2
        let n_dense = 10 * (4 * 2 + 1);
        let dt = 2.0 * PI / n_dense as f64;
        let mut pot = 0.0;
        for j in 0..n_dense {
            let t = j as f64 * dt;
            let x1 = lp.position(0, t);
            let x2 = lp.position(1, t);
            let r = ((x1[0] - x2[0]).powi(2) + (x1[1] - x2[1]).powi(2)).sqrt();
            pot += dt * spec.pair_potential(t, 0, 1, r).unwrap();
        }
        assert_relative_eq!(ev.value, 2.0 * PI - pot, max_relative = 1e-10);
        assert_relative_eq!(ev.value, 2.0 * PI - 4.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(ev.min_separation, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn kinetic_linear_in_masses() {
        let lp = opposite_circles(0.8, 3);
        let a = PotentialSpec::new(PotentialParams::default(), vec![1.0, 3.0], 2.0 * PI).unwrap();
        let b = PotentialSpec::new(PotentialParams::default(), vec![2.0, 6.0], 2.0 * PI).unwrap();
        let ea = action(&a, &lp, 21).unwrap();
        let eb = action(&b, &lp, 21).unwrap();
        assert_eq!(eb.kinetic, 2.0 * ea.kinetic);
    }

    #[test]
    fn zero_loop_single_body_has_zero_gradient() {
        let spec = PotentialSpec::uniform(PotentialParams::default(), 1, 1.0).unwrap();
        let lp = LoopConfiguration::zeros(1, 3, 1.0, 4).unwrap();
        let g = action_gradient(&spec, &lp, 17).unwrap();
        assert!(g.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn collision_at_node_is_an_error() {
        let spec = PotentialSpec::uniform(PotentialParams::default(), 2, 2.0 * PI).unwrap();
        let lp = LoopConfiguration::zeros(2, 2, 2.0 * PI, 1).unwrap();
        assert!(matches!(
            action(&spec, &lp, 5),
            Err(OrbitError::CollisionSample { node: 0, i: 0, j: 1 })
        ));
    }

    #[test]
    fn shape_checks() {
        let spec = PotentialSpec::uniform(PotentialParams::default(), 3, 2.0 * PI).unwrap();
        let lp = opposite_circles(1.0, 1);
        assert!(matches!(action(&spec, &lp, 13), Err(OrbitError::ShapeMismatch(_))));
        let spec2 = PotentialSpec::uniform(PotentialParams::default(), 2, 1.0).unwrap();
        assert!(matches!(action(&spec2, &lp, 13), Err(OrbitError::ShapeMismatch(_))));
        assert!(matches!(
            action(&PotentialSpec::uniform(PotentialParams::default(), 2, 2.0 * PI).unwrap(), &lp, 4),
            Err(OrbitError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn value_only_matches_full_evaluation() {
        let spec = PotentialSpec::uniform(PotentialParams::default(), 2, 2.0 * PI).unwrap();
        let lp = opposite_circles(0.6, 3).shifted(0.2);
        let f = ActionFunctional::for_loop(&spec, &lp, 21).unwrap();
        let a = f.evaluate(&lp).unwrap();
        let b = f.value(&lp).unwrap();
        assert_eq!(a.value, b.value);
        assert!(b.gradient.is_empty());
    }

    #[test]
    fn increment_agrees_with_value_difference() {
        let spec = PotentialSpec::uniform(PotentialParams { modulation_eps: 0.3, ..Default::default() }, 3, 2.0).unwrap();
        let layout = Layout::new(3, 2, 3);
        let c: Vec<f64> = (0..layout.len()).map(|q| ((q as f64 * 1.7).sin() + 0.2) / (1 + q % 3) as f64).collect();
        let lp = LoopConfiguration::new(3, 2, 2.0, 3, c).unwrap();
        let f = ActionFunctional::for_loop(&spec, &lp, 21).unwrap();
        let dir: Vec<f64> = (0..layout.len()).map(|q| (q as f64 * 0.37).cos()).collect();
        for scale in [1e-2, 1e-4] {
            let step: Vec<f64> = dir.iter().map(|d| scale * d).collect();
            let moved = lp.with_coefficients(lp.coefficients().iter().zip(&step).map(|(a, b)| a + b).collect()).unwrap();
            let direct = f.value(&moved).unwrap().value - f.value(&lp).unwrap().value;
            assert_relative_eq!(f.increment(&lp, &step).unwrap(), direct, max_relative = 1e-8);
        }
        // below the rounding level of f the first-order term still shows
        let g = f.evaluate(&lp).unwrap().gradient;
        let step: Vec<f64> = dir.iter().map(|d| 1e-14 * d).collect();
        let linear: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        assert_relative_eq!(f.increment(&lp, &step).unwrap(), linear, max_relative = 1e-6);
    }

}
