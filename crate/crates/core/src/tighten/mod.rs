//! Optimization-based tightening of the `(c, s)` boxes over neighborhoods of
//! each edge, and propagation of the improvements through the multipliers of
//! the bound rows.

use std::collections::VecDeque;

use acopf_conic::{SolveStatus, SolverConfig};
use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::PowerNetwork;
use crate::relax::{
    build_scoped, Interval, LinearCut, Objective, RelaxOptions, RelaxationModel, Scope, VarRef, VariableBounds,
};

/// Smallest change for which a new bound is committed.
pub const MIN_IMPROVEMENT: f64 = 1e-3;

/// Relative amount by which committed bounds are relaxed to absorb solver
/// inaccuracy.
pub const SAFETY_MARGIN: f64 = 1e-6;

/// Residual level under which a stopped bounding problem still counts as
/// solved; the safety margin absorbs the inaccuracy.
const USABLE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TightenError {
    #[error("bounding problem of edge {edge} is infeasible")]
    Infeasible { edge: usize },
}

/// Buses within `radius` steps of either end of `edge`, and every edge
/// touching one of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub edge: usize,
    pub radius: usize,
    pub buses: Vec<usize>,
    pub edges: Vec<usize>,
}

pub fn neighborhood(net: &PowerNetwork, edge: usize, radius: usize) -> Neighborhood {
    let inc = net.incident_edges();
    let mut depth = vec![usize::MAX; net.num_buses()];
    let mut queue = VecDeque::new();
    for b in [net.edges[edge].from, net.edges[edge].to] {
        depth[b] = 0;
        queue.push_back(b);
    }
    while let Some(u) = queue.pop_front() {
        if depth[u] == radius {
            continue;
        }
        for &e in &inc[u] {
            let v = net.edges[e].other(u);
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let buses: Vec<usize> = (0..net.num_buses()).filter(|&i| depth[i] != usize::MAX).collect();
    let mut edges: Vec<usize> = buses.iter().flat_map(|&i| inc[i].iter().copied()).collect();
    edges.sort();
    edges.dedup();
    Neighborhood { edge, radius, buses, edges }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Multipliers of the two bound rows of one variable, in minimization form,
/// with the bounds they were computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRowDual {
    pub var: VarRef,
    pub lo: f64,
    pub hi: f64,
    pub pi_lo: f64,
    pub pi_hi: f64,
}

/// One solved bounding problem: `min` (for `Lower`) or `max` of `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualRecord {
    pub target: VarRef,
    pub kind: BoundKind,
    pub value: f64,
    pub duals: Vec<BoundRowDual>,
}

impl DualRecord {
    fn min_form(&self, v: f64) -> f64 {
        match self.kind {
            BoundKind::Lower => v,
            BoundKind::Upper => -v,
        }
    }

    /// Dual objective less the contribution of the `(c, s)` bound rows.
    pub fn constant(&self) -> f64 {
        self.min_form(self.value) - self.duals.iter().map(|d| d.pi_lo * d.lo + d.pi_hi * d.hi).sum::<f64>()
    }

    /// The bound implied by the same multipliers for the boxes in `bounds`.
    pub fn candidate(&self, bounds: &VariableBounds) -> f64 {
        let mut v = self.min_form(self.value);
        for d in &self.duals {
            let b = box_of(bounds, d.var);
            v += d.pi_lo * (b.lo - d.lo) + d.pi_hi * (b.hi - d.hi);
        }
        self.min_form(v)
    }
}

fn box_of(bounds: &VariableBounds, v: VarRef) -> Interval {
    match v {
        VarRef::Cii(i) => bounds.bus[i],
        VarRef::C(e) => bounds.edges[e].c,
        VarRef::S(e) => bounds.edges[e].s,
    }
}

fn box_mut(bounds: &mut VariableBounds, v: VarRef) -> &mut Interval {
    match v {
        VarRef::Cii(i) => &mut bounds.bus[i],
        VarRef::C(e) => &mut bounds.edges[e].c,
        VarRef::S(e) => &mut bounds.edges[e].s,
    }
}

/// Applies a candidate bound if it improves the current one by at least
/// [`MIN_IMPROVEMENT`] after the safety margin; returns whether it did.
pub fn commit(b: &mut Interval, kind: BoundKind, candidate: f64) -> bool {
    if !candidate.is_finite() {
        return false;
    }
    let margin = SAFETY_MARGIN * candidate.abs().max(1.0);
    match kind {
        BoundKind::Lower => {
            let v = (candidate - margin).min(b.hi);
            if v - b.lo >= MIN_IMPROVEMENT {
                b.lo = v;
                return true;
            }
        }
        BoundKind::Upper => {
            let v = (candidate + margin).max(b.lo);
            if b.hi - v >= MIN_IMPROVEMENT {
                b.hi = v;
                return true;
            }
        }
    }
    false
}

/// Results of the four bounding problems of one edge.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingResult {
    pub edge: usize,
    pub records: Vec<DualRecord>,
}

fn record(rm: &RelaxationModel, sol: &acopf_conic::ModelSolution, scope: &Scope, target: VarRef, kind: BoundKind, bounds: &VariableBounds) -> DualRecord {
    let mut duals = Vec::with_capacity(2 * scope.edges.len());
    for &f in &scope.edges {
        for (var, rows) in [(VarRef::C(f), rm.c_rows[f]), (VarRef::S(f), rm.s_rows[f])] {
            let Some(rows) = rows else { continue };
            if rows.is_fixed() {
                continue;
            }
            let b = box_of(bounds, var);
            duals.push(BoundRowDual { var, lo: b.lo, hi: b.hi, pi_lo: sol.dual(rows.lo), pi_hi: sol.dual(rows.hi) });
        }
    }
    DualRecord { target, kind, value: sol.objective, duals }
}

/// Minimizes and maximizes `c` and `s` of `edge` over the relaxation
/// restricted to the edge's neighborhood of the given radius. Problems that
/// stop short of a usable solution produce no record.
pub fn bounding_problems(
    net: &PowerNetwork,
    bounds: &VariableBounds,
    cuts: &[LinearCut],
    edge: usize,
    radius: usize,
    opts: RelaxOptions,
    cfg: &SolverConfig,
) -> Result<BoundingResult, TightenError> {
    let nb = neighborhood(net, edge, radius);
    let scope = Scope { balance: nb.buses, edges: nb.edges };
    let mut records = Vec::with_capacity(4);
    for target in [VarRef::C(edge), VarRef::S(edge)] {
        if box_of(bounds, target).width() < MIN_IMPROVEMENT {
            continue;
        }
        for kind in [BoundKind::Lower, BoundKind::Upper] {
            let obj = match kind {
                BoundKind::Lower => Objective::Minimize(target),
                BoundKind::Upper => Objective::Maximize(target),
            };
            let rm = build_scoped(net, bounds, cuts, opts, &scope, obj);
            let sol = match rm.model.solve(cfg) {
                Ok(s) => s,
                Err(e) => panic!("bounding problem lowered to an invalid conic program: {e}"),
            };
            match sol.status {
                SolveStatus::PrimalInfeasible => return Err(TightenError::Infeasible { edge }),
                _ if sol.is_usable(USABLE_TOL) => records.push(record(&rm, &sol, &scope, target, kind, bounds)),
                s => debug!("bounding problem of edge {edge} ({target:?}, {kind:?}) ended with {s:?}"),
            }
        }
    }
    Ok(BoundingResult { edge, records })
}

/// Recomputes every record's bound for the boxes in `bounds` and commits the
/// improvements; returns the number of committed changes.
pub fn dual_tighten(records: &[DualRecord], bounds: &mut VariableBounds) -> usize {
    let candidates: Vec<(VarRef, BoundKind, f64)> =
        records.iter().map(|r| (r.target, r.kind, r.candidate(bounds))).collect();
    candidates.into_iter().filter(|&(v, k, c)| commit(box_mut(bounds, v), k, c)).count()
}

/// Narrows each edge's angle box to the angles of its `(c, s)` box when
/// `c > 0` on the whole box.
pub fn refine_angles(bounds: &mut VariableBounds) {
    for b in &mut bounds.edges {
        if b.c.lo <= 0.0 {
            continue;
        }
        let lo = if b.s.lo >= 0.0 { b.s.lo / b.c.hi } else { b.s.lo / b.c.lo }.atan();
        let hi = if b.s.hi >= 0.0 { b.s.hi / b.c.lo } else { b.s.hi / b.c.hi }.atan();
        if let Some(t) = b.theta.intersect(&Interval::new(lo, hi)) {
            b.theta = t;
        }
    }
}

/// Sum over edges of the area of the `(c, s)` box.
pub fn box_volume(bounds: &VariableBounds) -> f64 {
    bounds.edges.iter().map(|b| b.c.width() * b.s.width()).sum()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub problems: usize,
    pub committed: usize,
    pub dual_committed: usize,
    pub volume_before: f64,
    pub volume_after: f64,
}

/// One tightening round over `lines`: all bounding problems are solved
/// against the same boxes (in parallel), their optima committed together,
/// then one dual pass propagates the committed changes.
pub fn run_round(
    net: &PowerNetwork,
    bounds: &mut VariableBounds,
    cuts: &[LinearCut],
    lines: &[usize],
    radius: usize,
    opts: RelaxOptions,
    cfg: &SolverConfig,
) -> Result<RoundStats, TightenError> {
    let snapshot = bounds.clone();
    let results: Vec<Result<BoundingResult, TightenError>> =
        lines.par_iter().map(|&e| bounding_problems(net, &snapshot, cuts, e, radius, opts, cfg)).collect();
    let mut stats = RoundStats { volume_before: box_volume(bounds), ..Default::default() };
    let mut records = Vec::new();
    for r in results {
        let r = r?;
        stats.problems += r.records.len();
        for rec in &r.records {
            if commit(box_mut(bounds, rec.target), rec.kind, rec.value) {
                stats.committed += 1;
            }
        }
        records.extend(r.records);
    }
    stats.dual_committed = dual_tighten(&records, bounds);
    refine_angles(bounds);
    stats.volume_after = box_volume(bounds);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_threshold() {
        let mut b = Interval::new(0.0, 1.0);
        assert!(!commit(&mut b, BoundKind::Lower, 5e-4));
        assert_eq!(b, Interval::new(0.0, 1.0));
        assert!(commit(&mut b, BoundKind::Lower, 0.2));
        assert!((b.lo - (0.2 - 1e-6)).abs() < 1e-15);
        assert!(commit(&mut b, BoundKind::Upper, 0.5));
        assert!(!commit(&mut b, BoundKind::Upper, 0.4995));
        assert!(commit(&mut b, BoundKind::Lower, 3.0));
        assert!(b.lo <= b.hi);
    }

    #[test]
    fn synthetic_dual_record() {
        let mut bounds = VariableBounds { bus: vec![], edges: vec![Default::default(); 2] };
        bounds.edges[1].c = Interval::new(0.5, 1.0);
        let r = DualRecord {
            target: VarRef::C(0),
            kind: BoundKind::Lower,
            value: 0.7,
            duals: vec![BoundRowDual { var: VarRef::C(1), lo: 0.5, hi: 1.0, pi_lo: 1.0, pi_hi: 0.0 }],
        };
        assert!((r.candidate(&bounds) - 0.7).abs() < 1e-15);
        assert!((r.constant() - 0.2).abs() < 1e-15);
        bounds.edges[1].c.lo = 0.51;
        assert!((r.candidate(&bounds) - 0.71).abs() < 1e-12);
        let zero = DualRecord { duals: vec![BoundRowDual { pi_lo: 0.0, ..r.duals[0].clone() }], ..r.clone() };
        assert!((zero.candidate(&bounds) - 0.7).abs() < 1e-15);
    }
}
