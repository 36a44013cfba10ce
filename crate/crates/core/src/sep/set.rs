use acopf_conic::{LinExpr, Model, Sense, SolveStatus, SolverConfig, Var};

use crate::relax::VarRef;

/// `sum terms >= rhs` or `sum terms = rhs` over set columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SetRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl SetRow {
    pub fn new(terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self { terms, rhs }
    }
}

/// A symmetric matrix block whose upper-triangle entries are auxiliary
/// columns, listed column-major (`for j { for i <= j }`).
#[derive(Clone, Debug, PartialEq)]
pub struct PsdBlock {
    pub order: usize,
    pub entries: Vec<usize>,
}

/// `S = {x : exists u, rows hold, every PSD block of u is PSD}`.
///
/// Columns `0..x.len()` are the projected variables, the rest are the
/// auxiliary `u`. Each auxiliary column is bounded in magnitude by its
/// `aux_radius` on every point of `S`; separation uses the radii to absorb
/// solver residuals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConicSet {
    pub x: Vec<VarRef>,
    pub aux_radius: Vec<f64>,
    pub ineq: Vec<SetRow>,
    pub eq: Vec<SetRow>,
    pub psd: Vec<PsdBlock>,
}

impl ConicSet {
    pub fn num_x(&self) -> usize {
        self.x.len()
    }

    pub fn num_cols(&self) -> usize {
        self.x.len() + self.aux_radius.len()
    }

    pub fn add_aux(&mut self, radius: f64) -> usize {
        self.aux_radius.push(radius);
        self.num_cols() - 1
    }

    /// Adds `lo <= col <= hi` as two inequality rows.
    pub fn add_box(&mut self, col: usize, lo: f64, hi: f64) {
        self.ineq.push(SetRow::new(vec![(col, 1.0)], lo));
        self.ineq.push(SetRow::new(vec![(col, -1.0)], -hi));
    }

    /// Position of `v` among the projected columns.
    pub fn x_col(&self, v: VarRef) -> Option<usize> {
        self.x.iter().position(|&w| w == v)
    }

    /// Builds the set's constraints into `m` over fresh variables and
    /// returns one variable per column.
    pub fn embed(&self, m: &mut Model) -> Vec<Var> {
        let cols = m.add_vars(self.num_cols());
        let expr = |r: &SetRow| {
            let mut e = LinExpr::new();
            for &(j, a) in &r.terms {
                e.add(cols[j], a);
            }
            e
        };
        for r in &self.ineq {
            m.add_row(expr(r), Sense::Ge, r.rhs);
        }
        for r in &self.eq {
            m.add_row(expr(r), Sense::Eq, r.rhs);
        }
        for b in &self.psd {
            m.add_psd(b.order, b.entries.iter().map(|&j| cols[j].into()).collect());
        }
        cols
    }

    /// `max sum c_j x_j` over the set and a maximizer's projected part;
    /// `None` unless solved to optimality.
    pub fn maximize(&self, c: &[(VarRef, f64)], cfg: &SolverConfig) -> Option<(f64, Vec<f64>)> {
        let mut m = Model::new();
        let cols = self.embed(&mut m);
        let mut obj = LinExpr::new();
        for &(v, a) in c {
            obj.add(cols[self.x_col(v)?], a);
        }
        m.maximize(obj);
        let sol = m.solve(cfg).ok()?;
        let x = cols[..self.num_x()].iter().map(|&v| sol.value(v)).collect();
        (sol.status == SolveStatus::Optimal).then_some((sol.objective, x))
    }

    /// Whether `x` extends to a point of the set, judged by the smallest
    /// uniform relaxation of the rows that admits it.
    pub fn contains(&self, x: &[f64], tol: f64, cfg: &SolverConfig) -> bool {
        assert_eq!(x.len(), self.num_x());
        let mut m = Model::new();
        let cols = self.embed_relaxed(&mut m);
        for (j, &v) in x.iter().enumerate() {
            m.add_row(cols.0[j].into(), Sense::Eq, v);
        }
        m.minimize(cols.1.into());
        match m.solve(cfg) {
            Ok(sol) if sol.status == SolveStatus::Optimal => sol.objective <= tol,
            _ => false,
        }
    }

    fn embed_relaxed(&self, m: &mut Model) -> (Vec<Var>, Var) {
        let cols = m.add_vars(self.num_cols());
        let t = m.add_nonneg_var();
        let expr = |r: &SetRow| {
            let mut e = LinExpr::new();
            for &(j, a) in &r.terms {
                e.add(cols[j], a);
            }
            e
        };
        for r in &self.ineq {
            m.add_row(expr(r).plus(t, 1.0), Sense::Ge, r.rhs);
        }
        for r in &self.eq {
            m.add_row(expr(r).plus(t, 1.0), Sense::Ge, r.rhs);
            m.add_row(expr(r).plus(t, -1.0), Sense::Le, r.rhs);
        }
        for b in &self.psd {
            let mut upper = Vec::with_capacity(b.entries.len());
            let mut k = 0;
            for j in 0..b.order {
                for i in 0..=j {
                    let mut e: LinExpr = cols[b.entries[k]].into();
                    if i == j {
                        e.add(t, 1.0);
                    }
                    upper.push(e);
                    k += 1;
                }
            }
            m.add_psd(b.order, upper);
        }
        (cols, t)
    }
}
