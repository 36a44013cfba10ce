//! Cycles of the network, their fan triangulation into 3- and 4-cycles, the
//! bilinear minor equations over them, and the McCormick, discretized and
//! semidefinite set descriptions used for separation.

mod hull_oracle;
mod sets;
mod triangulate;

pub use hull_oracle::{sa_hull_oracle, SaInstance};
pub use sets::{build_cycle_sdp, build_discretized, build_mccormick, cycle_var_box, designated_variables, MAX_CELLS};
pub use triangulate::{
    artificial_edge_bounds, minor_equations, triangulate, CycleVar, MinorEquation, MinorKind, PairVar, Triangulation,
};

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::case::PowerNetwork;

/// Largest number of cycles added by one enlargement round.
pub const MAX_NEW_CYCLES: usize = 200;

/// A simple cycle: `edges[k]` joins `buses[k]` and `buses[k + 1]` (cyclically).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub buses: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.buses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buses.is_empty()
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edges.contains(&e)
    }

    pub fn edge_set(&self) -> BTreeSet<usize> {
        self.edges.iter().copied().collect()
    }

    /// Orders an edge set into a cycle, if it is a single simple cycle of
    /// length at least 3.
    pub fn from_edges(net: &PowerNetwork, edges: &BTreeSet<usize>) -> Option<Cycle> {
        if edges.len() < 3 {
            return None;
        }
        let mut deg = std::collections::BTreeMap::<usize, Vec<usize>>::new();
        for &e in edges {
            deg.entry(net.edges[e].from).or_default().push(e);
            deg.entry(net.edges[e].to).or_default().push(e);
        }
        if deg.values().any(|v| v.len() != 2) {
            return None;
        }
        let start = *deg.keys().next()?;
        let mut buses = vec![start];
        let mut order = Vec::with_capacity(edges.len());
        let mut cur = start;
        let mut prev_edge = usize::MAX;
        loop {
            let inc = &deg[&cur];
            let e = if inc[0] != prev_edge { inc[0] } else { inc[1] };
            order.push(e);
            let next = net.edges[e].other(cur);
            if next == start {
                break;
            }
            buses.push(next);
            cur = next;
            prev_edge = e;
        }
        (order.len() == edges.len()).then_some(Cycle { buses, edges: order })
    }
}

/// Fundamental cycles of a breadth-first spanning tree rooted at the
/// highest-degree bus (lowest index on ties), one per non-tree edge.
pub fn cycle_basis(net: &PowerNetwork) -> Vec<Cycle> {
    let nb = net.num_buses();
    if nb == 0 {
        return Vec::new();
    }
    let inc = net.incident_edges();
    let root = (0..nb).max_by(|&a, &b| inc[a].len().cmp(&inc[b].len()).then(b.cmp(&a))).unwrap();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nb];
    let mut depth = vec![usize::MAX; nb];
    let mut tree = vec![false; net.edges.len()];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &e in &inc[u] {
            let v = net.edges[e].other(u);
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = Some((u, e));
                tree[e] = true;
                queue.push_back(v);
            }
        }
    }
    let mut out = Vec::new();
    for (e, ed) in net.edges.iter().enumerate() {
        if tree[e] {
            continue;
        }
        let (mut a, mut b) = (ed.from, ed.to);
        let mut set: BTreeSet<usize> = BTreeSet::from([e]);
        while a != b {
            if depth[a] >= depth[b] {
                let (p, pe) = parent[a].unwrap();
                set.insert(pe);
                a = p;
            } else {
                let (p, pe) = parent[b].unwrap();
                set.insert(pe);
                b = p;
            }
        }
        if let Some(c) = Cycle::from_edges(net, &set) {
            out.push(c);
        }
    }
    out
}

/// One enlargement round: the symmetric differences of pairs of cycles that
/// share an edge, kept when they form a single simple cycle that is not
/// already known. At most [`MAX_NEW_CYCLES`] are returned.
pub fn enlarge_cycles(current: &[Cycle], net: &PowerNetwork) -> Vec<Cycle> {
    let sets: Vec<BTreeSet<usize>> = current.iter().map(Cycle::edge_set).collect();
    let mut seen: HashSet<BTreeSet<usize>> = sets.iter().cloned().collect();
    let mut out = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if sets[a].is_disjoint(&sets[b]) {
                continue;
            }
            let d: BTreeSet<usize> = sets[a].symmetric_difference(&sets[b]).copied().collect();
            if seen.contains(&d) {
                continue;
            }
            if let Some(c) = Cycle::from_edges(net, &d) {
                seen.insert(d);
                out.push(c);
                if out.len() == MAX_NEW_CYCLES {
                    return out;
                }
            }
        }
    }
    out
}
