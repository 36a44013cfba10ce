//! Upper bounds from relaxation solutions: a voltage profile is read off
//! the lifted point and polished by the local solver.

use std::collections::VecDeque;

use log::debug;
use num_complex::Complex64;

use super::local::local_opf;
use crate::case::{evaluate_ac_feasibility, AcPoint, PowerNetwork};
use crate::relax::{LiftedPoint, RelaxationSolution};

/// Largest violation, in p.u., of an accepted point.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Magnitudes `sqrt(c_ii)` and angles propagated from the reference bus
/// along a BFS tree by `atan2(s_ij, c_ij)`. Buses the tree does not reach
/// keep angle zero.
pub fn recover_voltages(net: &PowerNetwork, p: &LiftedPoint) -> Vec<Complex64> {
    let n = net.num_buses();
    let inc = net.incident_edges();
    let mut theta = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([net.ref_bus]);
    seen[net.ref_bus] = true;
    while let Some(u) = queue.pop_front() {
        for &e in &inc[u] {
            let ed = &net.edges[e];
            let v = ed.other(u);
            if seen[v] {
                continue;
            }
            let (c, s) = (p.c[e], p.s[e]);
            let phi = if c == 0.0 && s == 0.0 { 0.0 } else { s.atan2(c) };
            theta[v] = if u == ed.from { theta[u] + phi } else { theta[u] - phi };
            seen[v] = true;
            queue.push_back(v);
        }
    }
    (0..n).map(|i| Complex64::from_polar(p.cii[i].max(0.0).sqrt(), theta[i])).collect()
}

/// Total generation cost of a point in the network's cost units.
pub fn point_cost(net: &PowerNetwork, x: &AcPoint) -> f64 {
    net.generators.iter().zip(&x.pg).map(|(g, &p)| g.cost_at(p)).sum()
}

fn flat_start(net: &PowerNetwork) -> AcPoint {
    let mut v: Vec<Complex64> = net.buses.iter().map(|b| Complex64::new(0.5 * (b.v_min + b.v_max), 0.0)).collect();
    for g in &net.generators {
        let b = &net.buses[g.bus];
        v[g.bus] = Complex64::new(g.v_set.clamp(b.v_min, b.v_max), 0.0);
    }
    AcPoint {
        v,
        pg: net.generators.iter().map(|g| 0.5 * (g.p_min + g.p_max)).collect(),
        qg: net.generators.iter().map(|g| 0.5 * (g.q_min + g.q_max)).collect(),
    }
}

fn accept(net: &PowerNetwork, x: AcPoint, best: &mut Option<(AcPoint, f64)>) {
    let rep = evaluate_ac_feasibility(net, &x);
    if !rep.is_feasible(FEASIBILITY_TOL) {
        debug!("heuristic point rejected, violation {:.3e}", rep.max_violation());
        return;
    }
    let cost = point_cost(net, &x);
    if best.as_ref().map_or(true, |(_, c)| cost < *c) {
        *best = Some((x, cost));
    }
}

/// A feasible point and its cost, from the relaxation solution when given
/// and from a flat start otherwise or when that fails.
pub fn primal_heuristic(net: &PowerNetwork, relaxed: Option<&RelaxationSolution>) -> Option<(AcPoint, f64)> {
    let mut best = None;
    if let Some(sol) = relaxed {
        let start = AcPoint { v: recover_voltages(net, &sol.point), pg: sol.pg.clone(), qg: sol.qg.clone() };
        if start.v.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            accept(net, start.clone(), &mut best);
            if let Some(x) = local_opf(net, &start) {
                accept(net, x, &mut best);
            }
        }
    }
    if best.is_none() {
        if let Some(x) = local_opf(net, &flat_start(net)) {
            accept(net, x, &mut best);
        }
    }
    best
}
