use std::f64::consts::FRAC_PI_2;

use log::warn;
use serde::{Deserialize, Serialize};

use super::Cycle;
use crate::case::PowerNetwork;
use crate::relax::{edge_box, EdgeBox, Interval, VarRef, VariableBounds};

/// A scalar taking part in a cycle's minor equations: a variable of the
/// relaxation or the `c`/`s` of an artificial chord.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CycleVar {
    Orig(VarRef),
    ChordC(usize),
    ChordS(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinorKind {
    TriangleReal,
    TriangleImag,
    QuadReal,
    QuadImag,
}

/// `sum coef * a * b = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorEquation {
    pub kind: MinorKind,
    pub terms: Vec<(f64, CycleVar, CycleVar)>,
}

impl MinorEquation {
    pub fn eval(&self, value: impl Fn(CycleVar) -> f64) -> f64 {
        self.terms.iter().map(|&(k, a, b)| k * value(a) * value(b)).sum()
    }
}

/// How the pair `(u, v)` of a cycle is represented: by an edge of the
/// network (with `flip` when the edge runs `v -> u`) or by a chord.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairVar {
    Edge { edge: usize, flip: bool },
    Chord { index: usize, flip: bool },
}

impl PairVar {
    pub fn c(self) -> (f64, CycleVar) {
        match self {
            PairVar::Edge { edge, .. } => (1.0, CycleVar::Orig(VarRef::C(edge))),
            PairVar::Chord { index, .. } => (1.0, CycleVar::ChordC(index)),
        }
    }

    pub fn s(self) -> (f64, CycleVar) {
        match self {
            PairVar::Edge { edge, flip } => (if flip { -1.0 } else { 1.0 }, CycleVar::Orig(VarRef::S(edge))),
            PairVar::Chord { index, flip } => (if flip { -1.0 } else { 1.0 }, CycleVar::ChordS(index)),
        }
    }
}

/// Fan decomposition of a cycle from its reference bus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangulation {
    /// The cycle rotated so that `buses[0]` is the reference bus.
    pub cycle: Cycle,
    /// Bus lists of the 3- and 4-cycles, each starting at the reference.
    pub subcycles: Vec<Vec<usize>>,
    /// Positions `p` in `cycle.buses` of the far ends of the chords
    /// `(buses[0], buses[p])` that share two subcycles.
    pub chord_ends: Vec<usize>,
    /// For each chord, the network edge joining its ends, if any.
    pub chord_edges: Vec<Option<usize>>,
}

impl Triangulation {
    pub fn reference(&self) -> usize {
        self.cycle.buses[0]
    }

    /// Chords without a network edge, which carry their own variables.
    pub fn artificial(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.chord_ends.len()).filter(|&k| self.chord_edges[k].is_none())
    }

    pub fn num_artificial(&self) -> usize {
        self.artificial().count()
    }

    pub fn pair(&self, net: &PowerNetwork, u: usize, v: usize) -> PairVar {
        if let Some(e) = net.edge_between(u, v) {
            return PairVar::Edge { edge: e, flip: net.edges[e].from != u };
        }
        let r = self.reference();
        for (k, &p) in self.chord_ends.iter().enumerate() {
            let w = self.cycle.buses[p];
            if (u, v) == (r, w) {
                return PairVar::Chord { index: k, flip: false };
            }
            if (u, v) == (w, r) {
                return PairVar::Chord { index: k, flip: true };
            }
        }
        panic!("buses {u} and {v} are not a pair of the triangulation");
    }
}

/// Fan triangulation from the cycle's smallest bus index: 4-cycles
/// `{v1, vi, vi+1, vi+2}` while more than four buses remain, then a final
/// 3- or 4-cycle.
pub fn triangulate(net: &PowerNetwork, cycle: &Cycle) -> Triangulation {
    let n = cycle.len();
    assert!(n >= 3, "cycle of length {n}");
    let start = (0..n).min_by_key(|&k| cycle.buses[k]).unwrap();
    let buses: Vec<usize> = (0..n).map(|k| cycle.buses[(start + k) % n]).collect();
    let edges: Vec<usize> = (0..n).map(|k| cycle.edges[(start + k) % n]).collect();
    let mut subcycles = Vec::new();
    let mut chord_ends = Vec::new();
    let mut i = 1;
    while n - i + 1 > 4 {
        subcycles.push(vec![buses[0], buses[i], buses[i + 1], buses[i + 2]]);
        chord_ends.push(i + 2);
        i += 2;
    }
    let mut last = vec![buses[0]];
    last.extend_from_slice(&buses[i..]);
    subcycles.push(last);
    let chord_edges = chord_ends.iter().map(|&p| net.edge_between(buses[0], buses[p])).collect();
    Triangulation { cycle: Cycle { buses, edges }, subcycles, chord_ends, chord_edges }
}

/// Angle of traversing edge `e` from bus `u`.
fn traversal(net: &PowerNetwork, bounds: &VariableBounds, e: usize, u: usize) -> Interval {
    let t = bounds.edges[e].theta;
    if net.edges[e].from == u {
        t
    } else {
        t.negated()
    }
}

/// Boxes of every chord, oriented from the reference bus: the angle interval
/// is the intersection of the interval sums along both arcs of the cycle and
/// `[-pi/2, pi/2]`, mapped through the voltage boxes of the chord's ends.
pub fn artificial_edge_bounds(net: &PowerNetwork, bounds: &VariableBounds, tri: &Triangulation) -> Vec<EdgeBox> {
    let b = &tri.cycle.buses;
    let e = &tri.cycle.edges;
    let n = b.len();
    let volt = |i: usize| Interval::new(bounds.bus[i].lo.max(0.0).sqrt(), bounds.bus[i].hi.max(0.0).sqrt());
    tri.chord_ends
        .iter()
        .map(|&p| {
            let mut fwd = Interval::new(0.0, 0.0);
            for k in 0..p {
                let t = traversal(net, bounds, e[k], b[k]);
                fwd = Interval::new(fwd.lo + t.lo, fwd.hi + t.hi);
            }
            let mut bwd = Interval::new(0.0, 0.0);
            for k in (p..n).rev() {
                let t = traversal(net, bounds, e[k], b[(k + 1) % n]);
                bwd = Interval::new(bwd.lo + t.lo, bwd.hi + t.hi);
            }
            let theta = fwd
                .intersect(&bwd)
                .and_then(|t| t.intersect(&Interval::new(-FRAC_PI_2, FRAC_PI_2)))
                .unwrap_or_else(|| {
                    warn!("empty angle interval for a chord of cycle {:?}; using [-pi/2, pi/2]", b);
                    Interval::new(-FRAC_PI_2, FRAC_PI_2)
                });
            edge_box(volt(b[0]), volt(b[p]), theta)
        })
        .collect()
}

/// Real and imaginary parts of the 2x2 minors of every subcycle: for a
/// triangle `(i, j, k)` the minor `X_ii X_kj - X_ij X_ki`, for a quadrangle
/// `(i, j, l, k)` the minor `X_ij X_lk - X_ik X_lj`, where
/// `X_uv = c_uv - i s_uv`.
pub fn minor_equations(net: &PowerNetwork, tri: &Triangulation) -> Vec<MinorEquation> {
    let mut out = Vec::new();
    let pr = |u: usize, v: usize| tri.pair(net, u, v);
    let t = |k: f64, a: (f64, CycleVar), b: (f64, CycleVar)| (k * a.0 * b.0, a.1, b.1);
    for sc in &tri.subcycles {
        if sc.len() == 3 {
            let (i, j, k) = (sc[0], sc[1], sc[2]);
            let cii = (1.0, CycleVar::Orig(VarRef::Cii(i)));
            let (kj, ij, ki) = (pr(k, j), pr(i, j), pr(k, i));
            out.push(MinorEquation {
                kind: MinorKind::TriangleReal,
                terms: vec![t(1.0, cii, kj.c()), t(-1.0, ij.c(), ki.c()), t(1.0, ij.s(), ki.s())],
            });
            out.push(MinorEquation {
                kind: MinorKind::TriangleImag,
                terms: vec![t(1.0, cii, kj.s()), t(-1.0, ij.s(), ki.c()), t(-1.0, ij.c(), ki.s())],
            });
        } else {
            let (i, j, l, k) = (sc[0], sc[1], sc[2], sc[3]);
            let (ij, lk, ik, lj) = (pr(i, j), pr(l, k), pr(i, k), pr(l, j));
            out.push(MinorEquation {
                kind: MinorKind::QuadReal,
                terms: vec![
                    t(1.0, ij.c(), lk.c()),
                    t(-1.0, ij.s(), lk.s()),
                    t(-1.0, ik.c(), lj.c()),
                    t(1.0, ik.s(), lj.s()),
                ],
            });
            out.push(MinorEquation {
                kind: MinorKind::QuadImag,
                terms: vec![
                    t(1.0, ij.s(), lk.c()),
                    t(1.0, ij.c(), lk.s()),
                    t(-1.0, ik.s(), lj.c()),
                    t(-1.0, ik.c(), lj.s()),
                ],
            });
        }
    }
    out
}
