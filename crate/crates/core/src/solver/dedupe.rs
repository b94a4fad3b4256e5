use std::cmp::Ordering;

use crate::error::Result;
use crate::loopspace::{h1_distance, LoopConfiguration};

use super::OrbitRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedupeOptions {
    pub action_rel_tol: f64,
    pub path_tol: f64,
    /// Time shifts are tried on the grid `q T / shift_grid`.
    pub shift_grid: usize,
    /// Only shifts by multiples of `T/2` are symmetries (time-dependent potentials).
    pub half_period_only: bool,
}

impl Default for DedupeOptions {
    fn default() -> Self {
        Self {
            action_rel_tol: 1e-6,
            path_tol: 1e-3,
            shift_grid: 41,
            half_period_only: false,
        }
    }
}

/// Smallest H1 distance between `a` and time shifts of `b`.
///
/// Shifts run over the grid `q T / shift_grid`; when every shift is allowed
/// the best grid shift is then polished by golden-section search within one
/// grid cell, since converged orbits sit at arbitrary phases.
pub fn shift_aligned_distance(a: &LoopConfiguration, b: &LoopConfiguration, opts: &DedupeOptions) -> Result<f64> {
    let period = b.period();
    if opts.half_period_only {
        let d0 = h1_distance(a, b)?;
        let d1 = h1_distance(a, &b.shifted(period / 2.0))?;
        return Ok(d0.min(d1));
    }
    let cell = period / opts.shift_grid.max(1) as f64;
    let mut best = (f64::INFINITY, 0.0);
    for q in 0..opts.shift_grid.max(1) {
        let s = q as f64 * cell;
        let d = h1_distance(a, &b.shifted(s))?;
        if d < best.0 {
            best = (d, s);
        }
    }
    let dist = |s: f64| h1_distance(a, &b.shifted(s));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best.1 - cell, best.1 + cell);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (dist(x1)?, dist(x2)?);
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = dist(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = dist(x2)?;
        }
    }
    Ok(best.0.min(f1).min(f2))
}

fn total_order(a: &OrbitRecord, b: &OrbitRecord) -> Ordering {
    a.action_value
        .total_cmp(&b.action_value)
        .then(a.winding_seed_class.cmp(&b.winding_seed_class))
        .then(a.grad_norm.total_cmp(&b.grad_norm))
        .then_with(|| {
            let (x, y) = (a.orbit.coefficients(), b.orbit.coefficients());
            x.iter()
                .zip(y)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Merges records that share an action value (to `action_rel_tol`) and a
/// shift-aligned path (to `path_tol`), keeping the one with the smaller
/// gradient norm. The result is sorted by action value.
pub fn dedupe(records: Vec<OrbitRecord>, opts: &DedupeOptions) -> Result<Vec<OrbitRecord>> {
    let mut pending = records;
    // representatives are chosen lowest-gradient first; the tie-break keeps
    // the result independent of input order
    pending.sort_by(|a, b| a.grad_norm.total_cmp(&b.grad_norm).then_with(|| total_order(a, b)));
    let mut kept: Vec<OrbitRecord> = Vec::new();
    'outer: for rec in pending {
        for rep in &kept {
            let scale = rep.action_value.abs().max(rec.action_value.abs()).max(f64::MIN_POSITIVE);
            if (rep.action_value - rec.action_value).abs() > opts.action_rel_tol * scale {
                continue;
            }
            if rep.orbit.n_bodies() != rec.orbit.n_bodies() || rep.orbit.dim() != rec.orbit.dim() {
                continue;
            }
            if shift_aligned_distance(&rep.orbit, &rec.orbit, opts)? < opts.path_tol {
                continue 'outer;
            }
        }
        kept.push(rec);
    }
    kept.sort_by(total_order);
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::circular_seed;
    use std::f64::consts::PI;

    fn record(lp: LoopConfiguration, action: f64, grad: f64, class: i64) -> OrbitRecord {
        OrbitRecord::new(lp, action, grad, 0.0, class)
    }

    #[test]
    fn identical_records_collapse() {
        let lp = circular_seed(2, 2, 2.0 * PI, 4, 1, 0.7).unwrap();
        let r = record(lp, 6.28, 1e-10, 1);
        let out = dedupe(vec![r.clone(), r.clone(), r], &DedupeOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn grid_shift_is_merged() {
        let lp = circular_seed(2, 2, 2.0 * PI, 4, 1, 0.7).unwrap();
        let shifted = lp.shifted(2.0 * PI / 4.0);
        assert!(h1_distance(&lp, &shifted).unwrap() > 0.1);
        let out = dedupe(
            vec![record(lp, 6.28, 2e-10, 1), record(shifted, 6.28, 1e-10, 1)],
            &DedupeOptions { shift_grid: 36, ..Default::default() },
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].grad_norm, 1e-10);
    }

    #[test]
    fn off_grid_shift_is_merged_after_polish() {
        let lp = circular_seed(3, 2, 2.0, 4, 1, 0.9).unwrap();
        let shifted = lp.shifted(0.123456);
        let d = shift_aligned_distance(&lp, &shifted, &DedupeOptions::default()).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn different_windings_stay_apart() {
        let a = circular_seed(2, 2, 2.0 * PI, 4, 1, 0.7071).unwrap();
        let b = circular_seed(2, 2, 2.0 * PI, 4, 3, 0.4082).unwrap();
        let out = dedupe(
            vec![record(b, 6.0 * PI, 1e-10, 3), record(a, 2.0 * PI, 1e-10, 1)],
            &DedupeOptions::default(),
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].winding_seed_class, 1);
    }

    #[test]
    fn equal_action_different_paths_stay_apart() {
        let a = circular_seed(2, 2, 2.0 * PI, 4, 1, 0.7).unwrap();
        let b = circular_seed(2, 2, 2.0 * PI, 4, -1, 0.7).unwrap();
        let out = dedupe(
            vec![record(a, 1.0, 1e-10, 1), record(b, 1.0, 1e-10, -1)],
            &DedupeOptions::default(),
        )
        .unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn half_period_mode_only_uses_negation() {
        let lp = circular_seed(2, 2, 2.0, 4, 1, 0.7).unwrap();
        let opts = DedupeOptions { half_period_only: true, ..Default::default() };
        assert!(shift_aligned_distance(&lp, &lp.shifted(1.0), &opts).unwrap() < 1e-12);
        assert!(shift_aligned_distance(&lp, &lp.shifted(0.5), &opts).unwrap() > 0.1);
    }

    #[test]
    fn order_independent() {
        let recs: Vec<OrbitRecord> = (0..4)
            .map(|q| {
                let lp = circular_seed(2, 2, 2.0 * PI, 4, 1, 0.7).unwrap().shifted(q as f64 * 0.3);
                record(lp, 6.28, 1e-10 * (1.0 + q as f64), 1)
            })
            .collect();
        let mut rev = recs.clone();
        rev.reverse();
        let a = dedupe(recs, &DedupeOptions::default()).unwrap();
        let b = dedupe(rev, &DedupeOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
