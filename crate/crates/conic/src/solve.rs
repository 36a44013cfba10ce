use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, PSDTriangleConeT,
    SecondOrderConeT, SolverStatus, SupportedConeT, ZeroConeT,
};
use nalgebra::DMatrix;

use crate::program::{smat, Cone, ConicError, ConicProgram};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: u32,
    pub regularization: f64,
    /// Seconds; `None` means unlimited.
    pub time_limit: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol_feas: 1e-8, tol_gap: 1e-8, max_iter: 200, regularization: 1e-9, time_limit: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// `eq_duals` holds a ray `y` with `A'y in K*` and `b'y > 0`.
    PrimalInfeasible,
    /// `x` holds a ray with `A x = 0`, `x in K`, `c'x < 0`.
    DualInfeasible,
    /// Iteration, time or accuracy limit; the last iterate is attached.
    NumericalLimit,
}

/// Scaled residuals of a returned iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// `max(||Ax - b||, cone violation of x) / max(1, ||b|| + ||x||)`.
    pub primal: f64,
    /// `||c - A'y - z|| / max(1, ||c|| + ||y|| + ||z||)` plus dual cone violation of `z`.
    pub dual: f64,
    /// `|c'x - b'y| / max(1, min(|c'x|, |b'y|))`.
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Equality multipliers `y`.
    pub eq_duals: Vec<f64>,
    /// Dual slack `c - A'y` per variable, in the primal coordinates.
    pub cone_duals: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: u32,
    pub solve_time: f64,
    handles: BTreeMap<String, usize>,
}

impl ConicSolution {
    /// Multiplier of a named bound row.
    pub fn dual_of_bound(&self, handle: &str) -> Result<f64, ConicError> {
        self.handles
            .get(handle)
            .map(|&r| self.eq_duals[r])
            .ok_or_else(|| ConicError::UnknownHandle(handle.to_string()))
    }

    /// Whether the iterate can be used as an approximate optimum.
    pub fn is_usable(&self, tol: f64) -> bool {
        match self.status {
            SolveStatus::Optimal => true,
            SolveStatus::NumericalLimit => self.residuals.max() <= tol,
            _ => false,
        }
    }

    /// Primal PSD block of cone `k` as a dense symmetric matrix.
    pub fn psd_block(&self, prog: &ConicProgram, k: usize) -> Option<DMatrix<f64>> {
        let Cone::Psd(n) = prog.cones[k] else { return None };
        let off = prog.cone_offsets()[k];
        Some(smat(&self.x[off..off + prog.cones[k].span()], n))
    }
}

fn to_csc(prog: &ConicProgram) -> (CscMatrix<f64>, Vec<f64>, Vec<SupportedConeT<f64>>) {
    let m = prog.num_rows();
    let n = prog.num_vars();
    let mut rows = prog.eq_rows.clone();
    let mut cols = prog.eq_cols.clone();
    let mut vals = prog.eq_vals.clone();
    let mut b = prog.rhs.clone();
    let mut cones = Vec::new();
    if m > 0 {
        cones.push(ZeroConeT(m));
    }
    let mut row = m;
    let mut off = 0;
    for c in &prog.cones {
        let d = c.span();
        match *c {
            Cone::Free(_) => {}
            Cone::RotatedSoc(_) => {
                // (x0 + x1)/sqrt2, (x0 - x1)/sqrt2 turns the rotated cone into a standard one.
                rows.extend([row, row, row + 1, row + 1]);
                cols.extend([off, off + 1, off, off + 1]);
                vals.extend([-FRAC_1_SQRT_2, -FRAC_1_SQRT_2, -FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
                for k in 2..d {
                    rows.push(row + k);
                    cols.push(off + k);
                    vals.push(-1.0);
                }
            }
            _ => {
                for k in 0..d {
                    rows.push(row + k);
                    cols.push(off + k);
                    vals.push(-1.0);
                }
            }
        }
        match *c {
            Cone::Free(_) => {}
            Cone::NonNeg(d) => cones.push(NonnegativeConeT(d)),
            Cone::Soc(d) | Cone::RotatedSoc(d) => cones.push(SecondOrderConeT(d)),
            Cone::Psd(k) => cones.push(PSDTriangleConeT(k)),
        }
        if !matches!(c, Cone::Free(_)) {
            b.extend(std::iter::repeat(0.0).take(d));
            row += d;
        }
        off += d;
    }
    let a = CscMatrix::new_from_triplets(row, n, rows, cols, vals);
    (a, b, cones)
}

/// Distance-like violation of `x` (or `z`, all cones here being self-dual
/// except `Free`, whose dual is `{0}`) from the cone.
fn cone_violation(prog: &ConicProgram, v: &[f64], dual: bool) -> f64 {
    let mut worst: f64 = 0.0;
    let mut off = 0;
    for c in &prog.cones {
        let d = c.span();
        let s = &v[off..off + d];
        let viol = match *c {
            Cone::Free(_) => {
                if dual {
                    s.iter().fold(0.0f64, |a, x| a.max(x.abs()))
                } else {
                    0.0
                }
            }
            Cone::NonNeg(_) => s.iter().fold(0.0f64, |a, &x| a.max(-x)),
            Cone::Soc(_) => {
                let t: f64 = s[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
                (t - s[0]).max(0.0)
            }
            Cone::RotatedSoc(_) => {
                let u = (s[0] + s[1]) * FRAC_1_SQRT_2;
                let w = (s[0] - s[1]) * FRAC_1_SQRT_2;
                let t: f64 = (w * w + s[2..].iter().map(|x| x * x).sum::<f64>()).sqrt();
                (t - u).max(0.0)
            }
            Cone::Psd(n) => {
                let m = smat(s, n);
                let e = m.symmetric_eigenvalues();
                (-e.min()).max(0.0)
            }
        };
        worst = worst.max(viol);
        off += d;
    }
    worst
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub fn compute_residuals(prog: &ConicProgram, x: &[f64], y: &[f64], z: &[f64]) -> Residuals {
    let ax = prog.apply(x);
    let pr = ax.iter().zip(&prog.rhs).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    let primal = pr.max(cone_violation(prog, x, false))
        / (1.0f64).max(inf_norm(&prog.rhs) + inf_norm(x));
    let aty = prog.apply_transpose(y);
    let mut dr: f64 = 0.0;
    for k in 0..prog.num_vars() {
        dr = dr.max((prog.objective[k] - aty[k] - z[k]).abs());
    }
    let dual = (dr + cone_violation(prog, z, true))
        / (1.0f64).max(inf_norm(&prog.objective) + inf_norm(y) + inf_norm(z));
    let p: f64 = prog.objective.iter().zip(x).map(|(a, b)| a * b).sum();
    let d: f64 = prog.rhs.iter().zip(y).map(|(a, b)| a * b).sum();
    let gap = (p - d).abs() / (1.0f64).max(p.abs().min(d.abs()));
    Residuals { primal, dual, gap }
}

pub fn solve(prog: &ConicProgram, cfg: &SolverConfig) -> Result<ConicSolution, ConicError> {
    prog.validate()?;
    let start = Instant::now();
    let n = prog.num_vars();
    let m = prog.num_rows();
    let (a, b, cones) = to_csc(prog);
    let p = CscMatrix::zeros((n, n));
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(cfg.max_iter)
        .tol_feas(cfg.tol_feas)
        .tol_gap_abs(cfg.tol_gap)
        .tol_gap_rel(cfg.tol_gap)
        .static_regularization_constant(cfg.regularization)
        .time_limit(cfg.time_limit.unwrap_or(f64::INFINITY))
        .max_threads(1)
        .presolve_enable(false)
        .chordal_decomposition_enable(false)
        .build()
        .map_err(|e| ConicError::Backend(e.to_string()))?;
    let mut solver = DefaultSolver::new(&p, &prog.objective, &a, &b, &cones, settings)
        .map_err(|e| ConicError::Backend(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;

    let x = sol.x.clone();
    let y: Vec<f64> = sol.z[..m].iter().map(|v| -v).collect();
    let mut z = vec![0.0; n];
    let mut row = m;
    let mut off = 0;
    for c in &prog.cones {
        let d = c.span();
        match *c {
            Cone::Free(_) => {}
            Cone::RotatedSoc(_) => {
                let (z0, z1) = (sol.z[row], sol.z[row + 1]);
                z[off] = (z0 + z1) * FRAC_1_SQRT_2;
                z[off + 1] = (z0 - z1) * FRAC_1_SQRT_2;
                z[off + 2..off + d].copy_from_slice(&sol.z[row + 2..row + d]);
            }
            _ => z[off..off + d].copy_from_slice(&sol.z[row..row + d]),
        }
        if !matches!(c, Cone::Free(_)) {
            row += d;
        }
        off += d;
    }

    let residuals = compute_residuals(prog, &x, &y, &z);
    let status = match sol.status {
        SolverStatus::Solved => {
            let lim = cfg.tol_feas.max(cfg.tol_gap);
            if residuals.primal <= cfg.tol_feas && residuals.dual <= cfg.tol_feas && residuals.gap <= lim {
                SolveStatus::Optimal
            } else {
                SolveStatus::NumericalLimit
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::PrimalInfeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::DualInfeasible,
        _ => SolveStatus::NumericalLimit,
    };
    let objective = prog.objective.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + prog.objective_offset;
    let dual_objective = prog.rhs.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() + prog.objective_offset;
    Ok(ConicSolution {
        status,
        x,
        eq_duals: y,
        cone_duals: z,
        objective,
        dual_objective,
        residuals,
        iterations: sol.iterations,
        solve_time: start.elapsed().as_secs_f64(),
        handles: prog.handles.clone(),
    })
}
