//! Separation of a relaxation point over the cycle sets of the current
//! cycle list.

use acopf_conic::SolverConfig;
use rayon::prelude::*;

use super::params::Method;
use crate::case::PowerNetwork;
use crate::cycles::{
    artificial_edge_bounds, build_cycle_sdp, build_discretized, cycle_var_box, designated_variables,
    minor_equations, triangulate, Cycle, CycleVar, MinorEquation, Triangulation,
};
use crate::relax::{CutOrigin, LiftedPoint, LinearCut, VariableBounds};
use crate::sep::{round_coefficients, separate, var_radius, CutPool, VIOLATION_THRESHOLD};

/// The bound-independent parts of a cycle's sets.
#[derive(Clone, Debug)]
pub struct CycleModel {
    pub cycle: Cycle,
    pub tri: Triangulation,
    pub eqs: Vec<MinorEquation>,
    pub designated: Vec<CycleVar>,
}

impl CycleModel {
    pub fn new(net: &PowerNetwork, cycle: Cycle) -> Self {
        let tri = triangulate(net, &cycle);
        let eqs = minor_equations(net, &tri);
        let designated = designated_variables(&tri);
        Self { cycle, tri, eqs, designated }
    }

    /// Cuts separating `p` from this cycle's sets under `bounds`.
    pub fn separate(
        &self,
        net: &PowerNetwork,
        bounds: &VariableBounds,
        p: &LiftedPoint,
        method: Method,
        cfg: &SolverConfig,
    ) -> Vec<(LinearCut, f64)> {
        let chords = artificial_edge_bounds(net, bounds, &self.tri);
        let var_box = |v| cycle_var_box(bounds, &chords, v);
        let mut out = Vec::new();
        if method.uses_mccormick() {
            let set = build_discretized(&self.eqs, var_box, &self.designated);
            let x: Vec<f64> = set.x.iter().map(|&v| p.get(v)).collect();
            if let Some(cut) = separate(&set, &x, CutOrigin::McCormick, cfg).cut {
                let v = cut.violation(p);
                out.push((cut, v));
            }
        }
        if method.uses_sdp() {
            let set = build_cycle_sdp(net, &self.tri, var_box);
            let x: Vec<f64> = set.x.iter().map(|&v| p.get(v)).collect();
            if let Some(cut) = separate(&set, &x, CutOrigin::Sdp, cfg).cut {
                let cut = round_coefficients(&cut, |v| var_radius(bounds, v));
                let v = cut.violation(p);
                if v > VIOLATION_THRESHOLD {
                    out.push((cut, v));
                }
            }
        }
        out
    }
}

/// Separates `p` over the cycles selected by `keep` in parallel and adds the
/// cuts to `pool` in cycle order; returns the number added.
pub fn separate_cycles(
    net: &PowerNetwork,
    bounds: &VariableBounds,
    cycles: &[CycleModel],
    keep: impl Fn(&CycleModel) -> bool + Sync,
    p: &LiftedPoint,
    method: Method,
    pool: &mut CutPool,
    cfg: &SolverConfig,
) -> usize {
    if method == Method::SocpOnly {
        return 0;
    }
    let found: Vec<Vec<(LinearCut, f64)>> = cycles
        .par_iter()
        .map(|m| if keep(m) { m.separate(net, bounds, p, method, cfg) } else { Vec::new() })
        .collect();
    let mut added = 0;
    for (k, cuts) in found.into_iter().enumerate() {
        for (cut, v) in cuts {
            if pool.add(cut, v, k) {
                added += 1;
            }
        }
    }
    added
}
