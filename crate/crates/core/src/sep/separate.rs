use acopf_conic::{LinExpr, Model, SolveStatus, SolverConfig, Var};
use log::debug;
use nalgebra::DMatrix;

use super::ConicSet;
use crate::relax::{CutOrigin, Interval, LinearCut, VarRef};

/// Smallest violation for which a cut is returned.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Separation {
    /// Optimal value of the separation problem; positive means `x*` lies
    /// outside the set.
    pub value: f64,
    pub cut: Option<LinearCut>,
}

/// Finds `alpha' x >= beta` valid on `set` that `x*` violates the most,
/// subject to `|alpha|_inf <= 1`.
///
/// With `mu` the multipliers of the rows and `Z` those of the PSD blocks,
/// `alpha = A' mu`, `beta = b' mu` whenever `B' mu + Z-terms = 0`. The
/// returned cut is rebuilt from a cleaned dual (nonnegative `mu` on
/// inequalities, `Z` projected onto the PSD cone) and `beta` is lowered by the
/// remaining stationarity residual times the auxiliary radii, so it is valid
/// whatever the solver accuracy.
pub fn separate(set: &ConicSet, xstar: &[f64], origin: CutOrigin, cfg: &SolverConfig) -> Separation {
    assert_eq!(xstar.len(), set.num_x());
    let nx = set.num_x();
    let ncol = set.num_cols();
    let mut m = Model::new();
    let mu_i: Vec<Var> = (0..set.ineq.len()).map(|_| m.add_nonneg_var()).collect();
    let mu_e: Vec<Var> = m.add_vars(set.eq.len());
    let mut z_blocks: Vec<Vec<Var>> = Vec::with_capacity(set.psd.len());
    for b in &set.psd {
        let z = m.add_vars(b.entries.len());
        m.add_psd(b.order, z.iter().map(|&v| v.into()).collect());
        z_blocks.push(z);
    }

    let mut col_expr = vec![LinExpr::new(); ncol];
    let mut obj = LinExpr::new();
    for (rows, mus) in [(&set.ineq, &mu_i), (&set.eq, &mu_e)] {
        for (r, &mu) in rows.iter().zip(mus.iter()) {
            let mut c = r.rhs;
            for &(j, a) in &r.terms {
                col_expr[j].add(mu, a);
                if j < nx {
                    c -= a * xstar[j];
                }
            }
            obj.add(mu, c);
        }
    }
    for (b, z) in set.psd.iter().zip(&z_blocks) {
        for (k, (&col, &zv)) in b.entries.iter().zip(z).enumerate() {
            col_expr[col].add(zv, if is_diag(k) { 1.0 } else { 2.0 });
        }
    }
    for (j, e) in col_expr.iter().enumerate() {
        if j < nx {
            m.add_bounds_expr(e.clone(), -1.0, 1.0);
        } else {
            m.add_row(e.clone(), acopf_conic::Sense::Eq, 0.0);
        }
    }
    m.maximize(obj);

    let sol = match m.solve(cfg) {
        Ok(s) => s,
        Err(e) => {
            debug!("separation problem rejected: {e}");
            return Separation { value: 0.0, cut: None };
        }
    };
    if sol.status != SolveStatus::Optimal {
        debug!("separation problem ended with status {:?}", sol.status);
        return Separation { value: 0.0, cut: None };
    }

    let mut mu = vec![0.0; set.ineq.len() + set.eq.len()];
    for (k, &v) in mu_i.iter().enumerate() {
        mu[k] = sol.value(v).max(0.0);
    }
    for (k, &v) in mu_e.iter().enumerate() {
        mu[set.ineq.len() + k] = sol.value(v);
    }
    let mut resid = vec![0.0; ncol];
    let mut beta = 0.0;
    for (k, r) in set.ineq.iter().chain(&set.eq).enumerate() {
        beta += mu[k] * r.rhs;
        for &(j, a) in &r.terms {
            resid[j] += mu[k] * a;
        }
    }
    for (b, z) in set.psd.iter().zip(&z_blocks) {
        let vals: Vec<f64> = z.iter().map(|&v| sol.value(v)).collect();
        let proj = project_psd(&vals, b.order);
        for (k, &col) in b.entries.iter().enumerate() {
            resid[col] += proj[k] * if is_diag(k) { 1.0 } else { 2.0 };
        }
    }
    for j in nx..ncol {
        beta -= resid[j].abs() * set.aux_radius[j - nx];
    }
    let coeffs: Vec<(VarRef, f64)> =
        (0..nx).filter(|&j| resid[j] != 0.0).map(|j| (set.x[j], resid[j])).collect();
    let cut = LinearCut { coeffs, rhs: beta, origin };
    let lhs: f64 = (0..nx).map(|j| resid[j] * xstar[j]).sum();
    let value = beta - lhs;
    Separation { value: sol.objective, cut: (value > VIOLATION_THRESHOLD).then_some(cut) }
}

/// Whether position `k` of a column-major upper triangle is diagonal.
fn is_diag(k: usize) -> bool {
    let mut j = 0;
    let mut start = 0;
    while start + j + 1 <= k {
        start += j + 1;
        j += 1;
    }
    k - start == j
}

fn project_psd(upper: &[f64], n: usize) -> Vec<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            m[(i, j)] = upper[k];
            m[(j, i)] = upper[k];
            k += 1;
        }
    }
    let eig = m.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0)));
    let p = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    let mut out = Vec::with_capacity(upper.len());
    for j in 0..n {
        for i in 0..=j {
            out.push(p[(i, j)]);
        }
    }
    out
}

/// Rounds the coefficients to six decimals and lowers the right-hand side by
/// the largest change the rounding can cause over `radius` (the magnitude
/// bound of each variable), so the cut stays valid.
pub fn round_coefficients(cut: &LinearCut, radius: impl Fn(VarRef) -> f64) -> LinearCut {
    let mut rhs = cut.rhs;
    let mut coeffs = Vec::with_capacity(cut.coeffs.len());
    for &(v, a) in &cut.coeffs {
        let r = (a * 1e6).round() / 1e6;
        let d = (r - a).abs();
        if d > 0.0 {
            rhs -= d * radius(v);
        }
        if r != 0.0 {
            coeffs.push((v, r));
        }
    }
    LinearCut { coeffs, rhs, origin: cut.origin }
}

/// Magnitude bound of a lifted variable under `bounds`.
pub fn var_radius(bounds: &crate::relax::VariableBounds, v: VarRef) -> f64 {
    let i: Interval = match v {
        VarRef::Cii(i) => bounds.bus[i],
        VarRef::C(e) => bounds.edges[e].c,
        VarRef::S(e) => bounds.edges[e].s,
    };
    i.radius()
}
