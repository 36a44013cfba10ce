//! Convex hull of `{c^2 + s^2 = c_ii c_jj}` over a box, used as an oracle for
//! the edge cuts.
//!
//! The hull equals the box intersected with `{c^2 + s^2 <= c_ii c_jj}` and
//! with the convex hull of `{c^2 + s^2 >= c_ii c_jj}` over the box. Extreme
//! points of the latter lie on the box's one-dimensional faces, where each
//! face meets the set in at most two intervals.

use acopf_conic::{LinExpr, Model, Sense, SolveStatus, SolverConfig};

use super::Interval;

/// Box over `(c_ii, c_jj, c, s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeHullBox {
    pub cii: Interval,
    pub cjj: Interval,
    pub c: Interval,
    pub s: Interval,
}

impl EdgeHullBox {
    fn dims(&self) -> [Interval; 4] {
        [self.cii, self.cjj, self.c, self.s]
    }
}

fn push_unique(out: &mut Vec<f64>, x: f64) {
    if !out.iter().any(|&y| (y - x).abs() <= 1e-15 * (1.0 + x.abs())) {
        out.push(x);
    }
}

/// Free diagonal `t` with the other diagonal fixed at `other`:
/// `{t in [lo, hi] : t * other <= c^2 + s^2}`.
pub fn diag_free_points(lo: f64, hi: f64, other: f64, c: f64, s: f64) -> Vec<f64> {
    if other <= 0.0 {
        return vec![lo, hi];
    }
    let phi = (c * c + s * s) / other;
    if phi < lo {
        Vec::new()
    } else {
        let mut out = vec![lo];
        push_unique(&mut out, phi.min(hi));
        out
    }
}

/// `{t in [lo, hi] : t^2 >= phi}` as the endpoints of its pieces.
fn outside_radius(lo: f64, hi: f64, phi: f64) -> Vec<f64> {
    if phi <= 0.0 {
        return vec![lo, hi];
    }
    let r = phi.sqrt();
    let mut out = Vec::new();
    if lo <= -r {
        push_unique(&mut out, lo);
        push_unique(&mut out, hi.min(-r));
    }
    if hi >= r {
        push_unique(&mut out, lo.max(r));
        push_unique(&mut out, hi);
    }
    out
}

/// Free `c` with `c_ii`, `c_jj`, `s` fixed.
pub fn c_free_points(lo: f64, hi: f64, cii: f64, cjj: f64, s: f64) -> Vec<f64> {
    outside_radius(lo, hi, cii * cjj - s * s)
}

/// Free `s` with `c_ii`, `c_jj`, `c` fixed.
pub fn s_free_points(lo: f64, hi: f64, cii: f64, cjj: f64, c: f64) -> Vec<f64> {
    outside_radius(lo, hi, cii * cjj - c * c)
}

/// Points spanning `conv({c^2 + s^2 >= c_ii c_jj} ∩ box)`, collected from the
/// 32 one-dimensional faces, as `[c_ii, c_jj, c, s]`.
pub fn hull_extreme_points(b: &EdgeHullBox) -> Vec<[f64; 4]> {
    let d = b.dims();
    let mut out: Vec<[f64; 4]> = Vec::new();
    for free in 0..4 {
        let others: Vec<usize> = (0..4).filter(|&k| k != free).collect();
        for mask in 0..8u32 {
            let mut p = [0.0; 4];
            for (bit, &k) in others.iter().enumerate() {
                p[k] = if mask & (1 << bit) == 0 { d[k].lo } else { d[k].hi };
            }
            let (lo, hi) = (d[free].lo, d[free].hi);
            let pts = match free {
                0 => diag_free_points(lo, hi, p[1], p[2], p[3]),
                1 => diag_free_points(lo, hi, p[0], p[2], p[3]),
                2 => c_free_points(lo, hi, p[0], p[1], p[3]),
                _ => s_free_points(lo, hi, p[0], p[1], p[2]),
            };
            for t in pts {
                let mut q = p;
                q[free] = t;
                if !out.iter().any(|o| o.iter().zip(&q).all(|(a, b)| (a - b).abs() <= 1e-14)) {
                    out.push(q);
                }
            }
        }
    }
    out
}

/// Membership of `[c_ii, c_jj, c, s]` in the convex hull of the rank-one edge
/// set over the box, up to `tol`.
pub fn in_edge_hull(b: &EdgeHullBox, p: [f64; 4], tol: f64) -> bool {
    if !b.dims().iter().zip(&p).all(|(d, &x)| d.contains(x, tol)) {
        return false;
    }
    if p[2] * p[2] + p[3] * p[3] > p[0] * p[1] + tol {
        return false;
    }
    let pts = hull_extreme_points(b);
    if pts.is_empty() {
        return false;
    }
    // min t  s.t.  |sum_k lambda_k z_k - p| <= t,  lambda in the simplex.
    let mut m = Model::new();
    let lam: Vec<_> = pts.iter().map(|_| m.add_nonneg_var()).collect();
    let t = m.add_var();
    let mut sum = LinExpr::new();
    for &l in &lam {
        sum.add(l, 1.0);
    }
    m.add_row(sum, Sense::Eq, 1.0);
    for d in 0..4 {
        let mut e = LinExpr::new();
        for (k, &l) in lam.iter().enumerate() {
            e.add(l, pts[k][d]);
        }
        m.add_row(e.clone().plus(t, -1.0), Sense::Le, p[d]);
        m.add_row(e.plus(t, 1.0), Sense::Ge, p[d]);
    }
    m.minimize(t.into());
    match m.solve(&SolverConfig::default()) {
        Ok(s) if matches!(s.status, SolveStatus::Optimal | SolveStatus::NumericalLimit) => s.objective <= tol,
        _ => false,
    }
}
