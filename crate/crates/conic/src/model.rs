use std::f64::consts::SQRT_2;

use crate::program::{svec_len, Cone, ConicError, ConicProgram};
use crate::solve::{solve, ConicSolution, Residuals, SolveStatus, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(usize);

impl RowId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConeId(usize);

/// Affine expression `sum a_k x_k + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn term(v: Var, a: f64) -> Self {
        Self { terms: vec![(v, a)], constant: 0.0 }
    }

    pub fn plus(mut self, v: Var, a: f64) -> Self {
        self.add(v, a);
        self
    }

    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn add(&mut self, v: Var, a: f64) {
        if a != 0.0 {
            self.terms.push((v, a));
        }
    }

    pub fn add_expr(&mut self, e: &LinExpr, scale: f64) {
        for &(v, a) in &e.terms {
            self.add(v, a * scale);
        }
        self.constant += e.constant * scale;
    }

    pub fn scaled(&self, s: f64) -> LinExpr {
        let mut out = LinExpr::new();
        out.add_expr(self, s);
        out
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum::<f64>() + self.constant
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> Self {
        LinExpr::term(v, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Ge,
    Le,
}

/// Rows enforcing `lo <= x <= hi`. Both fields name the same equality row
/// when the interval is degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundRows {
    pub lo: RowId,
    pub hi: RowId,
}

impl BoundRows {
    pub fn is_fixed(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ConeShape {
    Soc,
    Rsoc,
    Psd(usize),
}

#[derive(Clone, Debug)]
struct RowData {
    expr: LinExpr,
    sense: Sense,
    rhs: f64,
    name: Option<String>,
}

#[derive(Clone, Debug)]
struct ConeData {
    shape: ConeShape,
    members: Vec<LinExpr>,
}

/// Modeling layer over [`ConicProgram`].
#[derive(Clone, Debug, Default)]
pub struct Model {
    nonneg: Vec<bool>,
    objective: LinExpr,
    maximize: bool,
    rows: Vec<RowData>,
    cones: Vec<ConeData>,
}

/// Widths below this are treated as fixed variables by [`Model::add_bounds`].
const FIXED_WIDTH: f64 = 1e-10;

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.nonneg.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self) -> Var {
        self.nonneg.push(false);
        Var(self.nonneg.len() - 1)
    }

    pub fn add_vars(&mut self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.add_var()).collect()
    }

    pub fn add_nonneg_var(&mut self) -> Var {
        self.nonneg.push(true);
        Var(self.nonneg.len() - 1)
    }

    /// `expr (sense) rhs`; the constant of `expr` moves to the right.
    pub fn add_row(&mut self, expr: LinExpr, sense: Sense, rhs: f64) -> RowId {
        let rhs = rhs - expr.constant;
        let expr = LinExpr { terms: expr.terms, constant: 0.0 };
        self.rows.push(RowData { expr, sense, rhs, name: None });
        RowId(self.rows.len() - 1)
    }

    pub fn add_bounds(&mut self, v: Var, lo: f64, hi: f64) -> BoundRows {
        self.add_bounds_expr(v.into(), lo, hi)
    }

    /// `lo <= expr <= hi`, as one equality row when the interval is degenerate.
    pub fn add_bounds_expr(&mut self, e: LinExpr, lo: f64, hi: f64) -> BoundRows {
        if hi - lo <= FIXED_WIDTH {
            let r = self.add_row(e, Sense::Eq, 0.5 * (lo + hi));
            BoundRows { lo: r, hi: r }
        } else {
            let a = self.add_row(e.clone(), Sense::Ge, lo);
            let b = self.add_row(e, Sense::Le, hi);
            BoundRows { lo: a, hi: b }
        }
    }

    pub fn name_row(&mut self, r: RowId, name: impl Into<String>) {
        self.rows[r.0].name = Some(name.into());
    }

    pub fn row_rhs(&self, r: RowId) -> f64 {
        self.rows[r.0].rhs
    }

    /// `members[0] >= ||members[1..]||`.
    pub fn add_soc(&mut self, members: Vec<LinExpr>) -> ConeId {
        assert!(!members.is_empty());
        self.cones.push(ConeData { shape: ConeShape::Soc, members });
        ConeId(self.cones.len() - 1)
    }

    /// `2 members[0] members[1] >= ||members[2..]||^2`, both leading members nonnegative.
    pub fn add_rsoc(&mut self, members: Vec<LinExpr>) -> ConeId {
        assert!(members.len() >= 2);
        self.cones.push(ConeData { shape: ConeShape::Rsoc, members });
        ConeId(self.cones.len() - 1)
    }

    /// Symmetric matrix with the given upper-triangle entries (column-major,
    /// unscaled) is PSD.
    pub fn add_psd(&mut self, order: usize, upper: Vec<LinExpr>) -> ConeId {
        assert_eq!(upper.len(), svec_len(order));
        self.cones.push(ConeData { shape: ConeShape::Psd(order), members: upper });
        ConeId(self.cones.len() - 1)
    }

    pub fn minimize(&mut self, e: LinExpr) {
        self.objective = e;
        self.maximize = false;
    }

    pub fn maximize(&mut self, e: LinExpr) {
        self.objective = e;
        self.maximize = true;
    }

    /// Standard form plus the map from model variables to program variables.
    ///
    /// Layout: free model variables, then one nonnegative span holding the
    /// nonnegative model variables and row slacks, then one block per cone.
    /// Program row `k < num_rows()` is model row `k`.
    pub fn lower(&self) -> (ConicProgram, Vec<usize>) {
        let n_free = self.nonneg.iter().filter(|&&b| !b).count();
        let n_nn = self.num_vars() - n_free;
        let n_slack = self.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let mut map = vec![0; self.num_vars()];
        let (mut f, mut g) = (0, n_free);
        for (k, &nn) in self.nonneg.iter().enumerate() {
            if nn {
                map[k] = g;
                g += 1;
            } else {
                map[k] = f;
                f += 1;
            }
        }
        let mut prog = ConicProgram::default();
        let mut col = n_free + n_nn;
        for (k, r) in self.rows.iter().enumerate() {
            for &(v, a) in &r.expr.terms {
                prog.push_entry(k, map[v.0], a);
            }
            match r.sense {
                Sense::Eq => {}
                Sense::Ge => {
                    prog.push_entry(k, col, -1.0);
                    col += 1;
                }
                Sense::Le => {
                    prog.push_entry(k, col, 1.0);
                    col += 1;
                }
            }
            prog.rhs.push(r.rhs);
            if let Some(name) = &r.name {
                prog.handles.insert(name.clone(), k);
            }
        }
        debug_assert_eq!(col, n_free + n_nn + n_slack);
        if n_free > 0 {
            prog.cones.push(Cone::Free(n_free));
        }
        if n_nn + n_slack > 0 {
            prog.cones.push(Cone::NonNeg(n_nn + n_slack));
        }
        let mut row = self.rows.len();
        for c in &self.cones {
            let psd = matches!(c.shape, ConeShape::Psd(_));
            let mut offdiag = Vec::new();
            if let ConeShape::Psd(n) = c.shape {
                for j in 0..n {
                    for i in 0..=j {
                        offdiag.push(i != j);
                    }
                }
            }
            for (k, e) in c.members.iter().enumerate() {
                let s = if psd && offdiag[k] { SQRT_2 } else { 1.0 };
                prog.push_entry(row, col + k, 1.0);
                for &(v, a) in &e.terms {
                    prog.push_entry(row, map[v.0], -s * a);
                }
                prog.rhs.push(s * e.constant);
                row += 1;
            }
            col += c.members.len();
            prog.cones.push(match c.shape {
                ConeShape::Soc => Cone::Soc(c.members.len()),
                ConeShape::Rsoc => Cone::RotatedSoc(c.members.len()),
                ConeShape::Psd(n) => Cone::Psd(n),
            });
        }
        let sgn = if self.maximize { -1.0 } else { 1.0 };
        prog.objective = vec![0.0; col];
        for &(v, a) in &self.objective.terms {
            prog.objective[map[v.0]] += sgn * a;
        }
        prog.objective_offset = sgn * self.objective.constant;
        (prog, map)
    }

    pub fn solve(&self, cfg: &SolverConfig) -> Result<ModelSolution, ConicError> {
        let (prog, map) = self.lower();
        let raw = solve(&prog, cfg)?;
        let values = map.iter().map(|&k| raw.x[k]).collect();
        let sgn = if self.maximize { -1.0 } else { 1.0 };
        let mut cone_duals = Vec::with_capacity(self.cones.len());
        let mut row = self.rows.len();
        for c in &self.cones {
            cone_duals.push(raw.eq_duals[row..row + c.members.len()].to_vec());
            row += c.members.len();
        }
        Ok(ModelSolution {
            status: raw.status,
            objective: sgn * raw.objective,
            values,
            row_duals: raw.eq_duals[..self.rows.len()].to_vec(),
            cone_duals,
            residuals: raw.residuals,
            raw,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ModelSolution {
    pub status: SolveStatus,
    /// Objective in the model's own sense.
    pub objective: f64,
    pub values: Vec<f64>,
    /// Row multipliers of the minimization form (`max f` is solved as
    /// `min -f`): `>=` rows nonnegative, `<=` rows nonpositive.
    pub row_duals: Vec<f64>,
    /// Multipliers of each cone's linking rows, in member order (scaled
    /// vectorization for PSD blocks).
    pub cone_duals: Vec<Vec<f64>>,
    pub residuals: Residuals,
    pub raw: ConicSolution,
}

impl ModelSolution {
    pub fn value(&self, v: Var) -> f64 {
        self.values[v.0]
    }

    pub fn eval(&self, e: &LinExpr) -> f64 {
        e.eval(&self.values)
    }

    pub fn dual(&self, r: RowId) -> f64 {
        self.row_duals[r.0]
    }

    pub fn is_usable(&self, tol: f64) -> bool {
        self.raw.is_usable(tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowering_layout() {
        let mut m = Model::new();
        let x = m.add_var();
        let y = m.add_nonneg_var();
        let r = m.add_row(LinExpr::from(x).plus(y, 1.0).plus_const(2.0), Sense::Ge, 3.0);
        m.add_soc(vec![LinExpr::from(x), LinExpr::from(y)]);
        m.minimize(x.into());
        let (p, map) = m.lower();
        assert_eq!(map, vec![0, 1]);
        assert_eq!(p.cones, vec![Cone::Free(1), Cone::NonNeg(2), Cone::Soc(2)]);
        assert_eq!(p.rhs[r.index()], 1.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn degenerate_bounds_share_a_row() {
        let mut m = Model::new();
        let x = m.add_var();
        let b = m.add_bounds(x, 1.0, 1.0);
        assert!(b.is_fixed());
        let b = m.add_bounds(x, 0.0, 1.0);
        assert!(!b.is_fixed());
    }
}
