use acopf_conic::{LinExpr, Model, Sense, SolveStatus, SolverConfig, Var};

use super::{build_mccormick, CycleVar, MinorEquation, MinorKind};
use crate::relax::{Interval, VarRef};
use crate::sep::ConicSet;

/// `S_a = {(x, y) in box : sum a_k x_k y_k = 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaInstance {
    pub a: Vec<f64>,
    pub x: Vec<Interval>,
    pub y: Vec<Interval>,
}

impl SaInstance {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Column variables used for `x_k` and `y_k` in set descriptions.
    pub fn x_var(k: usize) -> VarRef {
        VarRef::C(k)
    }

    pub fn y_var(k: usize) -> VarRef {
        VarRef::S(k)
    }

    pub fn equation(&self) -> MinorEquation {
        MinorEquation {
            kind: MinorKind::QuadReal,
            terms: (0..self.dim())
                .map(|k| (self.a[k], CycleVar::Orig(Self::x_var(k)), CycleVar::Orig(Self::y_var(k))))
                .collect(),
        }
    }

    /// The McCormick outer approximation of `conv(S_a)`.
    pub fn mccormick(&self) -> ConicSet {
        build_mccormick(&[self.equation()], |v| match v {
            CycleVar::Orig(VarRef::C(k)) => self.x[k],
            CycleVar::Orig(VarRef::S(k)) => self.y[k],
            _ => unreachable!(),
        })
    }
}

/// One piece of `conv(S_a)`: every coordinate but `k` fixed at a box corner
/// and `(x_k, y_k)` on a branch of the hyperbola `x_k y_k = alpha`, or a
/// single point.
enum Piece {
    Point(Vec<f64>, Vec<f64>),
    Arc { k: usize, fixed: (Vec<f64>, Vec<f64>), arc: Arc },
}

/// The branch `x' y' = alpha'` with `x' = sx x`, `y' = sy y`, `alpha' > 0`
/// and `x'` in `[x1, x2]`.
struct Arc {
    sx: f64,
    sy: f64,
    alpha: f64,
    x1: f64,
    x2: f64,
}

fn corners(i: Interval, j: Interval) -> [(f64, f64); 4] {
    [(i.lo, j.lo), (i.lo, j.hi), (i.hi, j.lo), (i.hi, j.hi)]
}

/// Pieces of `{x y = alpha} ∩ X × Y`.
fn hyperbola_pieces(alpha: f64, xb: Interval, yb: Interval) -> Vec<Result<Arc, (f64, f64)>> {
    let mut out = Vec::new();
    if alpha.abs() <= 1e-14 {
        if xb.contains(0.0, 0.0) {
            out.push(Err((0.0, yb.lo)));
            out.push(Err((0.0, yb.hi)));
        }
        if yb.contains(0.0, 0.0) {
            out.push(Err((xb.lo, 0.0)));
            out.push(Err((xb.hi, 0.0)));
        }
        return out;
    }
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            let ap = sx * sy * alpha;
            if ap <= 0.0 {
                continue;
            }
            let (xl, xh) = if sx > 0.0 { (xb.lo, xb.hi) } else { (-xb.hi, -xb.lo) };
            let (yl, yh) = if sy > 0.0 { (yb.lo, yb.hi) } else { (-yb.hi, -yb.lo) };
            if xh <= 0.0 || yh <= 0.0 {
                continue;
            }
            let x1 = xl.max(ap / yh);
            let x2 = if yl > 0.0 { xh.min(ap / yl) } else { xh };
            if x1 > x2 + 1e-12 {
                continue;
            }
            if x2 - x1 <= 1e-12 {
                out.push(Err((sx * x1, sy * ap / x1)));
            } else {
                out.push(Ok(Arc { sx, sy, alpha: ap, x1, x2 }));
            }
        }
    }
    out
}

fn pieces(inst: &SaInstance) -> Vec<Piece> {
    let n = inst.dim();
    let mut out = Vec::new();
    let ncorner = 4usize.pow(n as u32);
    let fix = |code: usize| -> (Vec<f64>, Vec<f64>) {
        let mut xs = vec![0.0; n];
        let mut ys = vec![0.0; n];
        for i in 0..n {
            let (x, y) = corners(inst.x[i], inst.y[i])[(code >> (2 * i)) & 3];
            xs[i] = x;
            ys[i] = y;
        }
        (xs, ys)
    };
    let scale = inst.a.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
    for code in 0..ncorner {
        let (xs, ys) = fix(code);
        let r: f64 = (0..n).map(|i| inst.a[i] * xs[i] * ys[i]).sum();
        if r.abs() <= 1e-12 * scale.max(1.0) {
            out.push(Piece::Point(xs, ys));
        }
    }
    for k in 0..n {
        for code in 0..ncorner {
            if (code >> (2 * k)) & 3 != 0 {
                continue;
            }
            let (xs, ys) = fix(code);
            let rest: f64 = (0..n).filter(|&i| i != k).map(|i| inst.a[i] * xs[i] * ys[i]).sum();
            let alpha = -rest / inst.a[k];
            for p in hyperbola_pieces(alpha, inst.x[k], inst.y[k]) {
                match p {
                    Err((u, v)) => {
                        let (mut px, mut py) = (xs.clone(), ys.clone());
                        px[k] = u;
                        py[k] = v;
                        out.push(Piece::Point(px, py));
                    }
                    Ok(arc) => out.push(Piece::Arc { k, fixed: (xs.clone(), ys.clone()), arc }),
                }
            }
        }
    }
    out
}

/// Membership of `(x, y)` in `conv(S_a)` for `N <= 3`, decided from the
/// extreme-point structure of `S_a`: every extreme point has all pairs
/// `(x_i, y_i)` at box corners, or all but one, the remaining pair lying on
/// the hyperbola fixed by the others. The hull of each hyperbola branch is
/// the region between the branch and its chord, which is second-order cone
/// representable, so membership is a conic feasibility problem over convex
/// combinations of these pieces.
pub fn sa_hull_oracle(inst: &SaInstance, x: &[f64], y: &[f64], tol: f64) -> bool {
    let n = inst.dim();
    assert!(n <= 3, "hull oracle limited to three products");
    assert!(x.len() == n && y.len() == n);
    let ps = pieces(inst);
    if ps.is_empty() {
        return false;
    }
    let mut m = Model::new();
    let t = m.add_nonneg_var();
    let mut sum_x = vec![LinExpr::new(); n];
    let mut sum_y = vec![LinExpr::new(); n];
    let mut weights = LinExpr::new();
    for p in &ps {
        let w: Var = m.add_nonneg_var();
        weights.add(w, 1.0);
        match p {
            Piece::Point(px, py) => {
                for i in 0..n {
                    sum_x[i].add(w, px[i]);
                    sum_y[i].add(w, py[i]);
                }
            }
            Piece::Arc { k, fixed, arc } => {
                for i in (0..n).filter(|i| i != k) {
                    sum_x[i].add(w, fixed.0[i]);
                    sum_y[i].add(w, fixed.1[i]);
                }
                // Transformed coordinates u = sx x_k, v = sy y_k, scaled by w.
                let u = m.add_var();
                let v = m.add_var();
                sum_x[*k].add(u, arc.sx);
                sum_y[*k].add(v, arc.sy);
                m.add_rsoc(vec![u.into(), v.into(), LinExpr::term(w, (2.0 * arc.alpha).sqrt())]);
                let (y1, y2) = (arc.alpha / arc.x1, arc.alpha / arc.x2);
                let slope = (y2 - y1) / (arc.x2 - arc.x1);
                m.add_row(LinExpr::term(v, 1.0).plus(u, -slope).plus(w, -(y1 - slope * arc.x1)), Sense::Le, 0.0);
                m.add_row(LinExpr::term(u, 1.0).plus(w, -arc.x1), Sense::Ge, 0.0);
                m.add_row(LinExpr::term(u, 1.0).plus(w, -arc.x2), Sense::Le, 0.0);
            }
        }
    }
    m.add_row(weights, Sense::Eq, 1.0);
    for i in 0..n {
        for (e, target) in [(&sum_x[i], x[i]), (&sum_y[i], y[i])] {
            m.add_row(e.clone().plus(t, 1.0), Sense::Ge, target);
            m.add_row(e.clone().plus(t, -1.0), Sense::Le, target);
        }
    }
    m.minimize(t.into());
    match m.solve(&SolverConfig::default()) {
        Ok(sol) if sol.status == SolveStatus::Optimal => sol.objective <= tol,
        _ => false,
    }
}
