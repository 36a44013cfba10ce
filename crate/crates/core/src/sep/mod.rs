//! Cutting planes from conic set descriptions and the pool that stores them.

mod separate;
mod set;

pub use separate::{round_coefficients, separate, var_radius, Separation, VIOLATION_THRESHOLD};
pub use set::{ConicSet, PsdBlock, SetRow};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::relax::{CutOrigin, LinearCut, LiftedPoint, VarRef};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledCut {
    pub cut: LinearCut,
    /// Violation at the point it was separated from, after normalization.
    pub violation: f64,
    /// Index of the cycle whose set produced it.
    pub cycle: usize,
    /// Number of solves in which the cut was tight.
    pub active: usize,
}

/// Cuts normalized to `|alpha|_inf = 1`, without duplicates.
#[derive(Clone, Debug, Default)]
pub struct CutPool {
    cuts: Vec<PooledCut>,
    keys: HashSet<Vec<(VarRef, i64)>>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> impl Iterator<Item = &LinearCut> {
        self.cuts.iter().map(|c| &c.cut)
    }

    pub fn entries(&self) -> &[PooledCut] {
        &self.cuts
    }

    pub fn linear_cuts(&self) -> Vec<LinearCut> {
        self.cuts().cloned().collect()
    }

    pub fn count(&self, origin: CutOrigin) -> usize {
        self.cuts.iter().filter(|c| c.cut.origin == origin).count()
    }

    /// Inserts `cut` unless a cut with the same normalized coefficients is
    /// already stored. Non-finite or empty cuts are rejected.
    pub fn add(&mut self, cut: LinearCut, violation: f64, cycle: usize) -> bool {
        let norm = cut.inf_norm();
        if !(norm > 0.0) || !norm.is_finite() || !cut.rhs.is_finite() {
            return false;
        }
        let mut coeffs: Vec<(VarRef, f64)> = cut.coeffs.iter().map(|&(v, a)| (v, a / norm)).collect();
        coeffs.sort_by(|a, b| a.0.cmp(&b.0));
        let cut = LinearCut { coeffs, rhs: cut.rhs / norm, origin: cut.origin };
        let key = fingerprint(&cut);
        if !self.keys.insert(key) {
            return false;
        }
        self.cuts.push(PooledCut { cut, violation: violation / norm, cycle, active: 0 });
        true
    }

    /// Counts the cuts that hold with equality (within `tol`) at `p`.
    pub fn record_activity(&mut self, p: &LiftedPoint, tol: f64) {
        for c in &mut self.cuts {
            if c.cut.violation(p).abs() <= tol {
                c.active += 1;
            }
        }
    }
}

fn fingerprint(cut: &LinearCut) -> Vec<(VarRef, i64)> {
    let q = |x: f64| (x * 1e8).round() as i64;
    let mut key: Vec<(VarRef, i64)> = cut.coeffs.iter().filter(|c| q(c.1) != 0).map(|&(v, a)| (v, q(a))).collect();
    key.push((VarRef::Cii(usize::MAX), q(cut.rhs)));
    key
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut(a: f64, b: f64, rhs: f64) -> LinearCut {
        LinearCut { coeffs: vec![(VarRef::C(0), a), (VarRef::S(0), b)], rhs, origin: CutOrigin::McCormick }
    }

    #[test]
    fn duplicates_rejected_after_scaling() {
        let mut pool = CutPool::new();
        assert!(pool.add(cut(0.5, -0.25, 0.1), 0.1, 0));
        assert!(!pool.add(cut(0.5, -0.25, 0.1), 0.1, 0));
        assert!(!pool.add(cut(1.0, -0.5, 0.2), 0.1, 0));
        assert!(pool.add(cut(1.0, -0.5, 0.3), 0.1, 0));
        assert_eq!(pool.len(), 2);
        assert!(pool.cuts().all(|c| c.inf_norm() <= 1.0 + 1e-9));
    }

    #[test]
    fn degenerate_cut_rejected() {
        let mut pool = CutPool::new();
        assert!(!pool.add(cut(0.0, 0.0, 1.0), 1.0, 0));
        assert!(!pool.add(cut(1.0, 0.0, f64::NAN), 1.0, 0));
    }
}
