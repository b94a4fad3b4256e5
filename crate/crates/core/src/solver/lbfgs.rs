use std::collections::VecDeque;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Curvature pairs for the two-loop recursion.
pub(crate) struct History {
    capacity: usize,
    pairs: VecDeque<Pair>,
}

impl History {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Stores `(s, y)` unless the curvature `s.y` is not safely positive.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 1e-12 * norm(&s) * norm(&y)) || self.capacity == 0 {
            return false;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(Pair { s, y, rho: 1.0 / sy });
        true
    }

    /// `-H g` with `H` the implicit inverse-Hessian approximation.
    pub fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for p in self.pairs.iter().rev() {
            let a = p.rho * dot(&p.s, &q);
            q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some(last) = self.pairs.back() {
            let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for (p, a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = p.rho * dot(&p.y, &q);
            q.iter_mut().zip(&p.s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|qi| *qi = -*qi);
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_history_is_steepest_descent() {
        let h = History::new(5);
        assert_eq!(h.direction(&[1.0, -2.0]), vec![-1.0, 2.0]);
    }

    #[test]
    fn recovers_newton_step_on_quadratic() {
        // f = 0.5 x^T diag(1, 10) x
        let mut h = History::new(5);
        h.push(vec![1.0, 0.0], vec![1.0, 0.0]);
        h.push(vec![0.0, 1.0], vec![0.0, 10.0]);
        let d = h.direction(&[3.0, 20.0]);
        assert!((d[0] + 3.0).abs() < 1e-12);
        assert!((d[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_curvature_and_evicts_oldest() {
        let mut h = History::new(1);
        assert!(!h.push(vec![1.0], vec![-1.0]));
        assert!(h.push(vec![1.0], vec![2.0]));
        assert!(h.push(vec![1.0], vec![4.0]));
        assert_eq!(h.pairs.len(), 1);
        assert_eq!(h.pairs[0].y, vec![4.0]);
    }
}
