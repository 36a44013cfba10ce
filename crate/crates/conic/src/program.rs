use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

/// Largest PSD block order accepted.
pub const MAX_PSD_ORDER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("cone spans cover {spans} variables but the program has {vars}")]
    SpanMismatch { spans: usize, vars: usize },
    #[error("equality entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("PSD block of order {0} exceeds the maximum order {MAX_PSD_ORDER}")]
    PsdTooLarge(usize),
    #[error("invalid cone dimension {dim} for {kind}")]
    BadConeDim { kind: &'static str, dim: usize },
    #[error("non-finite data in {0}")]
    NonFinite(&'static str),
    #[error("unknown bound handle `{0}`")]
    UnknownHandle(String),
    #[error("solver backend rejected the problem: {0}")]
    Backend(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Free(usize),
    NonNeg(usize),
    /// `x0 >= ||x[1..]||`.
    Soc(usize),
    /// `2 x0 x1 >= ||x[2..]||^2`, `x0, x1 >= 0`.
    RotatedSoc(usize),
    /// Order-n symmetric PSD matrix, upper triangle column-major, off-diagonals
    /// scaled by sqrt(2) so that inner products are preserved.
    Psd(usize),
}

impl Cone {
    pub fn span(&self) -> usize {
        match *self {
            Cone::Free(d) | Cone::NonNeg(d) | Cone::Soc(d) | Cone::RotatedSoc(d) => d,
            Cone::Psd(n) => svec_len(n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Cone::Free(_) => "free",
            Cone::NonNeg(_) => "nonneg",
            Cone::Soc(_) => "soc",
            Cone::RotatedSoc(_) => "rsoc",
            Cone::Psd(_) => "psd",
        }
    }
}

pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(i, j)` of an order-n matrix in the scaled vectorization.
pub fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

/// Inverse of the scaled vectorization.
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let x = v[svec_index(i, j)];
            if i == j {
                m[(i, i)] = x;
            } else {
                let y = x / std::f64::consts::SQRT_2;
                m[(i, j)] = y;
                m[(j, i)] = y;
            }
        }
    }
    m
}

/// `min c'x + offset  s.t.  A x = b,  x in K`.
#[derive(Clone, Debug, Default)]
pub struct ConicProgram {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    /// Equality block as triplets; repeated entries are summed.
    pub eq_rows: Vec<usize>,
    pub eq_cols: Vec<usize>,
    pub eq_vals: Vec<f64>,
    pub rhs: Vec<f64>,
    pub cones: Vec<Cone>,
    /// Named equality rows whose multipliers are of interest.
    pub handles: BTreeMap<String, usize>,
}

impl ConicProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn push_entry(&mut self, row: usize, col: usize, val: f64) {
        self.eq_rows.push(row);
        self.eq_cols.push(col);
        self.eq_vals.push(val);
    }

    /// Start offset of every cone span.
    pub fn cone_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cones.len());
        let mut off = 0;
        for c in &self.cones {
            out.push(off);
            off += c.span();
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let spans: usize = self.cones.iter().map(Cone::span).sum();
        if spans != self.num_vars() {
            return Err(ConicError::SpanMismatch { spans, vars: self.num_vars() });
        }
        for c in &self.cones {
            match *c {
                Cone::Psd(n) if n > MAX_PSD_ORDER => return Err(ConicError::PsdTooLarge(n)),
                Cone::Psd(0) => return Err(ConicError::BadConeDim { kind: "psd", dim: 0 }),
                Cone::Soc(0) => return Err(ConicError::BadConeDim { kind: "soc", dim: 0 }),
                Cone::RotatedSoc(d) if d < 2 => {
                    return Err(ConicError::BadConeDim { kind: "rsoc", dim: d })
                }
                _ => {}
            }
        }
        let (m, n) = (self.num_rows(), self.num_vars());
        for k in 0..self.eq_vals.len() {
            let (r, c) = (self.eq_rows[k], self.eq_cols[k]);
            if r >= m || c >= n {
                return Err(ConicError::IndexOutOfRange { row: r, col: c, rows: m, cols: n });
            }
        }
        if self.eq_rows.len() != self.eq_cols.len() || self.eq_rows.len() != self.eq_vals.len() {
            return Err(ConicError::Backend("triplet arrays differ in length".into()));
        }
        if !self.eq_vals.iter().all(|v| v.is_finite()) {
            return Err(ConicError::NonFinite("equality matrix"));
        }
        if !self.rhs.iter().all(|v| v.is_finite()) {
            return Err(ConicError::NonFinite("right-hand side"));
        }
        if !self.objective.iter().all(|v| v.is_finite()) || !self.objective_offset.is_finite() {
            return Err(ConicError::NonFinite("objective"));
        }
        for (name, &row) in &self.handles {
            if row >= m {
                return Err(ConicError::UnknownHandle(name.clone()));
            }
        }
        Ok(())
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_rows()];
        for k in 0..self.eq_vals.len() {
            out[self.eq_rows[k]] += self.eq_vals[k] * x[self.eq_cols[k]];
        }
        out
    }

    /// `A' y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars()];
        for k in 0..self.eq_vals.len() {
            out[self.eq_cols[k]] += self.eq_vals[k] * y[self.eq_rows[k]];
        }
        out
    }
}
