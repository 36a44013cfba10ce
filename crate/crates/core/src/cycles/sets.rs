use std::collections::BTreeMap;

use log::warn;

use super::{CycleVar, MinorEquation, Triangulation};
use crate::case::PowerNetwork;
use crate::relax::{EdgeBox, Interval, VarRef, VariableBounds};
use crate::sep::{ConicSet, PsdBlock, SetRow};

/// Largest number of cells of a discretized set.
pub const MAX_CELLS: usize = 64;

/// Widths below this are treated as fixed variables.
const FIXED_WIDTH: f64 = 1e-10;

/// Box of a cycle scalar: relaxation variables from `bounds`, chord
/// variables from `chords` (indexed like the triangulation's chords).
pub fn cycle_var_box(bounds: &VariableBounds, chords: &[EdgeBox], v: CycleVar) -> Interval {
    match v {
        CycleVar::Orig(VarRef::Cii(i)) => bounds.bus[i],
        CycleVar::Orig(VarRef::C(e)) => bounds.edges[e].c,
        CycleVar::Orig(VarRef::S(e)) => bounds.edges[e].s,
        CycleVar::ChordC(k) => chords[k].c,
        CycleVar::ChordS(k) => chords[k].s,
    }
}

/// The scalars and distinct products of a list of minor equations.
struct Layout {
    vars: Vec<CycleVar>,
    products: Vec<(usize, usize)>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Layout {
    fn new(eqs: &[MinorEquation]) -> Self {
        let mut vars: Vec<CycleVar> = eqs.iter().flat_map(|e| e.terms.iter().flat_map(|t| [t.1, t.2])).collect();
        vars.sort();
        vars.dedup();
        let idx = |v: CycleVar| vars.binary_search(&v).unwrap();
        let mut prod_idx = BTreeMap::new();
        let mut products = Vec::new();
        let mut rows = Vec::new();
        for e in eqs {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &(k, a, b) in &e.terms {
                let key = (idx(a).min(idx(b)), idx(a).max(idx(b)));
                let p = *prod_idx.entry(key).or_insert_with(|| {
                    products.push(key);
                    products.len() - 1
                });
                match row.iter_mut().find(|r| r.0 == p) {
                    Some(r) => r.1 += k,
                    None => row.push((p, k)),
                }
            }
            rows.push(row);
        }
        Layout { vars, products, rows }
    }

    /// Projected variables in column order.
    fn x_vars(&self) -> Vec<VarRef> {
        self.vars
            .iter()
            .filter_map(|v| match v {
                CycleVar::Orig(r) => Some(*r),
                _ => None,
            })
            .collect()
    }
}

fn product_radius(x: Interval, y: Interval) -> f64 {
    [x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi].iter().fold(0.0, |a: f64, b| a.max(b.abs()))
}

/// Writes the box, McCormick and linearized equation rows of one copy of the
/// layout. With `lambda`, every constant is multiplied by that column.
fn emit(set: &mut ConicSet, lay: &Layout, var_cols: &[usize], w_cols: &[usize], boxes: &[Interval], lambda: Option<usize>) {
    let push = |set: &mut ConicSet, mut terms: Vec<(usize, f64)>, rhs: f64| match lambda {
        Some(l) => {
            terms.push((l, -rhs));
            set.ineq.push(SetRow::new(terms, 0.0));
        }
        None => set.ineq.push(SetRow::new(terms, rhs)),
    };
    for (k, b) in boxes.iter().enumerate() {
        push(set, vec![(var_cols[k], 1.0)], b.lo);
        push(set, vec![(var_cols[k], -1.0)], -b.hi);
    }
    for (p, &(a, b)) in lay.products.iter().enumerate() {
        let (xa, xb) = (var_cols[a], var_cols[b]);
        let (x, y) = (boxes[a], boxes[b]);
        let w = w_cols[p];
        push(set, vec![(w, 1.0), (xa, -y.lo), (xb, -x.lo)], -x.lo * y.lo);
        push(set, vec![(w, 1.0), (xa, -y.hi), (xb, -x.hi)], -x.hi * y.hi);
        push(set, vec![(w, -1.0), (xa, y.lo), (xb, x.hi)], x.hi * y.lo);
        push(set, vec![(w, -1.0), (xa, y.hi), (xb, x.lo)], x.lo * y.hi);
    }
    for row in &lay.rows {
        set.eq.push(SetRow::new(row.iter().map(|&(p, k)| (w_cols[p], k)).collect(), 0.0));
    }
}

/// McCormick relaxation of the minor equations: one variable per distinct
/// product bounded by its four envelope rows, the equations linear in those
/// variables, and the boxes of every scalar.
pub fn build_mccormick(eqs: &[MinorEquation], var_box: impl Fn(CycleVar) -> Interval) -> ConicSet {
    let lay = Layout::new(eqs);
    let mut set = ConicSet { x: lay.x_vars(), ..Default::default() };
    let boxes: Vec<Interval> = lay.vars.iter().map(|&v| var_box(v)).collect();
    let mut next_x = 0;
    let var_cols: Vec<usize> = lay
        .vars
        .iter()
        .zip(&boxes)
        .map(|(v, b)| match v {
            CycleVar::Orig(_) => {
                next_x += 1;
                next_x - 1
            }
            _ => set.add_aux(b.radius()),
        })
        .collect();
    let w_cols: Vec<usize> =
        lay.products.iter().map(|&(a, b)| set.add_aux(product_radius(boxes[a], boxes[b]))).collect();
    emit(&mut set, &lay, &var_cols, &w_cols, &boxes, None);
    set
}

/// The `c` and `s` of the cycle edges that touch neither end of the fan,
/// i.e. the edges that are neither first nor last in their subcycle.
pub fn designated_variables(tri: &Triangulation) -> Vec<CycleVar> {
    let n = tri.cycle.len();
    (1..n - 1)
        .flat_map(|k| {
            let e = tri.cycle.edges[k];
            [CycleVar::Orig(VarRef::C(e)), CycleVar::Orig(VarRef::S(e))]
        })
        .collect()
}

/// Convex hull of the McCormick relaxations over the cells obtained by
/// bisecting each designated scalar, in disjunctive form: the projected
/// variables are sums of per-cell copies, each cell's rows are scaled by its
/// weight, and the weights form a convex combination.
///
/// Fixed scalars are not split. When more than [`MAX_CELLS`] cells would
/// result, only the two widest scalars are split.
pub fn build_discretized(
    eqs: &[MinorEquation],
    var_box: impl Fn(CycleVar) -> Interval,
    designated: &[CycleVar],
) -> ConicSet {
    let lay = Layout::new(eqs);
    let boxes: Vec<Interval> = lay.vars.iter().map(|&v| var_box(v)).collect();
    let mut split: Vec<usize> = designated
        .iter()
        .filter_map(|v| lay.vars.binary_search(v).ok())
        .filter(|&k| boxes[k].width() > FIXED_WIDTH)
        .collect();
    split.sort();
    split.dedup();
    if split.len() > MAX_CELLS.trailing_zeros() as usize {
        warn!("{} bisected scalars exceed the cell cap; splitting the two widest", split.len());
        split.sort_by(|&a, &b| boxes[b].width().total_cmp(&boxes[a].width()).then(a.cmp(&b)));
        split.truncate(2);
        split.sort();
    }
    let ncells = 1usize << split.len();
    let mut set = ConicSet { x: lay.x_vars(), ..Default::default() };
    let nx = set.num_x();
    let mut lambdas = Vec::with_capacity(ncells);
    let mut copies: Vec<Vec<usize>> = vec![Vec::with_capacity(ncells); nx];
    for d in 0..ncells {
        let mut cb = boxes.clone();
        for (bit, &k) in split.iter().enumerate() {
            let m = cb[k].mid();
            cb[k] = if d >> bit & 1 == 0 { Interval::new(cb[k].lo, m) } else { Interval::new(m, cb[k].hi) };
        }
        let mut xi = 0;
        let var_cols: Vec<usize> = lay
            .vars
            .iter()
            .zip(&boxes)
            .map(|(v, b)| {
                let col = set.add_aux(b.radius());
                if let CycleVar::Orig(_) = v {
                    copies[xi].push(col);
                    xi += 1;
                }
                col
            })
            .collect();
        let w_cols: Vec<usize> =
            lay.products.iter().map(|&(a, b)| set.add_aux(product_radius(boxes[a], boxes[b]))).collect();
        let l = set.add_aux(1.0);
        set.ineq.push(SetRow::new(vec![(l, 1.0)], 0.0));
        lambdas.push(l);
        emit(&mut set, &lay, &var_cols, &w_cols, &cb, Some(l));
    }
    for (j, cols) in copies.iter().enumerate() {
        let mut terms = vec![(j, 1.0)];
        terms.extend(cols.iter().map(|&c| (c, -1.0)));
        set.eq.push(SetRow::new(terms, 0.0));
    }
    set.eq.push(SetRow::new(lambdas.iter().map(|&l| (l, 1.0)).collect(), 1.0));
    set
}

/// Positive semidefinite lift of every subcycle: a real symmetric `W` of
/// order `2m` per subcycle of `m` buses (real parts first, imaginary parts
/// second) with `c_aa = W_pp + W_p'p'`, `c_uv = W_pq + W_p'q'` and
/// `s_uv = W_pq' - W_qp'` for consecutive buses; chord variables are shared
/// between the blocks of the cycle.
pub fn build_cycle_sdp(
    net: &PowerNetwork,
    tri: &Triangulation,
    var_box: impl Fn(CycleVar) -> Interval,
) -> ConicSet {
    let mut vars: Vec<CycleVar> = Vec::new();
    for sc in &tri.subcycles {
        let m = sc.len();
        for p in 0..m {
            vars.push(CycleVar::Orig(VarRef::Cii(sc[p])));
            let pv = tri.pair(net, sc[p], sc[(p + 1) % m]);
            vars.push(pv.c().1);
            vars.push(pv.s().1);
        }
    }
    vars.sort();
    vars.dedup();
    let mut set = ConicSet::default();
    for v in &vars {
        if let CycleVar::Orig(r) = v {
            set.x.push(*r);
        }
    }
    let mut col: BTreeMap<CycleVar, usize> = BTreeMap::new();
    let mut xi = 0;
    for &v in &vars {
        let b = var_box(v);
        let c = match v {
            CycleVar::Orig(_) => {
                xi += 1;
                xi - 1
            }
            _ => set.add_aux(b.radius()),
        };
        col.insert(v, c);
        set.add_box(c, b.lo, b.hi);
    }
    for sc in &tri.subcycles {
        let m = sc.len();
        let order = 2 * m;
        let radius = sc.iter().map(|&a| var_box(CycleVar::Orig(VarRef::Cii(a))).radius()).fold(0.0, f64::max);
        let entries: Vec<usize> = (0..acopf_conic::svec_len(order)).map(|_| set.add_aux(radius)).collect();
        let w = |a: usize, b: usize| entries[acopf_conic::svec_index(a, b)];
        for p in 0..m {
            let cii = col[&CycleVar::Orig(VarRef::Cii(sc[p]))];
            set.eq.push(SetRow::new(vec![(cii, 1.0), (w(p, p), -1.0), (w(m + p, m + p), -1.0)], 0.0));
            let q = (p + 1) % m;
            let pv = tri.pair(net, sc[p], sc[q]);
            let (_, cv) = pv.c();
            let (ss, sv) = pv.s();
            set.eq.push(SetRow::new(vec![(col[&cv], 1.0), (w(p, q), -1.0), (w(m + p, m + q), -1.0)], 0.0));
            set.eq.push(SetRow::new(vec![(col[&sv], ss), (w(p, m + q), -1.0), (w(q, m + p), 1.0)], 0.0));
        }
        set.psd.push(PsdBlock { order, entries });
    }
    set
}
