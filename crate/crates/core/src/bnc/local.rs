//! Local AC OPF solver in polar coordinates: a primal-dual interior-point
//! method on `min f(x) s.t. g(x) = 0, h(x) <= 0` with exact derivatives.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::case::{AcPoint, PowerNetwork};
use crate::relax::cost_scale;
use num_complex::Complex64;

/// Value, gradient and Hessian of a function of `[theta_i, theta_j, v_i, v_j]`.
#[derive(Clone, Copy, Default)]
struct Local {
    val: f64,
    grad: [f64; 4],
    hess: [[f64; 4]; 4],
}

impl Local {
    fn combine(terms: &[(f64, &Local)]) -> Local {
        let mut out = Local::default();
        for &(k, l) in terms {
            out.val += k * l.val;
            for a in 0..4 {
                out.grad[a] += k * l.grad[a];
                for b in 0..4 {
                    out.hess[a][b] += k * l.hess[a][b];
                }
            }
        }
        out
    }
}

/// `c = v_i v_j cos(theta_j - theta_i)`, `s = v_i v_j sin(theta_j - theta_i)`,
/// `v_i^2` and `v_j^2` with their derivatives.
fn pair_terms(ti: f64, tj: f64, vi: f64, vj: f64) -> [Local; 4] {
    let d = tj - ti;
    let (sn, cs) = d.sin_cos();
    let p = vi * vj;
    let c = Local {
        val: p * cs,
        grad: [p * sn, -p * sn, vj * cs, vi * cs],
        hess: [
            [-p * cs, p * cs, vj * sn, vi * sn],
            [p * cs, -p * cs, -vj * sn, -vi * sn],
            [vj * sn, -vj * sn, 0.0, cs],
            [vi * sn, -vi * sn, cs, 0.0],
        ],
    };
    let s = Local {
        val: p * sn,
        grad: [-p * cs, p * cs, vj * sn, vi * sn],
        hess: [
            [-p * sn, p * sn, -vj * cs, -vi * cs],
            [p * sn, -p * sn, vj * cs, vi * cs],
            [-vj * cs, vj * cs, 0.0, sn],
            [-vi * cs, vi * cs, sn, 0.0],
        ],
    };
    let mut ii = Local { val: vi * vi, ..Default::default() };
    ii.grad[2] = 2.0 * vi;
    ii.hess[2][2] = 2.0;
    let mut jj = Local { val: vj * vj, ..Default::default() };
    jj.grad[3] = 2.0 * vj;
    jj.hess[3][3] = 2.0;
    [c, s, ii, jj]
}

/// A scalar function: global indices of its local variables and its local
/// derivatives. Functions with fewer than four variables repeat index 0 with
/// zero derivatives.
struct Func {
    idx: [usize; 4],
    f: Local,
}

enum Row {
    /// Sum of affine terms `coef * x[k]` plus sum of local functions plus a constant.
    Mixed { lin: Vec<(usize, f64)>, funcs: Vec<(f64, usize)>, constant: f64 },
    /// `P^2 + Q^2 - rate^2` of one branch end, from two local functions.
    Thermal { p: usize, q: usize, rate: f64 },
}

struct Layout {
    nb: usize,
    ng: usize,
}

impl Layout {
    fn theta(&self, i: usize) -> usize {
        i
    }
    fn v(&self, i: usize) -> usize {
        self.nb + i
    }
    fn pg(&self, g: usize) -> usize {
        2 * self.nb + g
    }
    fn qg(&self, g: usize) -> usize {
        2 * self.nb + self.ng + g
    }
    fn n(&self) -> usize {
        2 * self.nb + 2 * self.ng
    }
}

struct Problem<'a> {
    net: &'a PowerNetwork,
    lay: Layout,
    eq: Vec<Row>,
    ineq: Vec<Row>,
    scale: f64,
}

impl<'a> Problem<'a> {
    fn new(net: &'a PowerNetwork) -> Self {
        let lay = Layout { nb: net.num_buses(), ng: net.generators.len() };
        let mut eq = Vec::new();
        let mut ineq = Vec::new();
        // Branch-end flows are functions 4k..4k+4: p_from, q_from, p_to, q_to.
        let mut p_out: Vec<Vec<usize>> = vec![Vec::new(); lay.nb];
        let mut q_out: Vec<Vec<usize>> = vec![Vec::new(); lay.nb];
        for (k, br) in net.branches.iter().enumerate() {
            p_out[br.from].push(4 * k);
            q_out[br.from].push(4 * k + 1);
            p_out[br.to].push(4 * k + 2);
            q_out[br.to].push(4 * k + 3);
            if let Some(rate) = br.rate {
                ineq.push(Row::Thermal { p: 4 * k, q: 4 * k + 1, rate });
                ineq.push(Row::Thermal { p: 4 * k + 2, q: 4 * k + 3, rate });
            }
            if br.angle_max < 2.0 * PI {
                ineq.push(Row::Mixed {
                    lin: vec![(lay.theta(br.from), 1.0), (lay.theta(br.to), -1.0)],
                    funcs: vec![],
                    constant: -br.angle_max,
                });
            }
            if br.angle_min > -2.0 * PI {
                ineq.push(Row::Mixed {
                    lin: vec![(lay.theta(br.from), -1.0), (lay.theta(br.to), 1.0)],
                    funcs: vec![],
                    constant: br.angle_min,
                });
            }
        }
        let gens_at = net.gens_at();
        // The shunt terms are functions 4 * nbranch + i (v_i^2).
        let nbr = net.branches.len();
        for (i, b) in net.buses.iter().enumerate() {
            let sh = 4 * nbr + i;
            let mut lin: Vec<(usize, f64)> = gens_at[i].iter().map(|&g| (lay.pg(g), 1.0)).collect();
            let mut funcs: Vec<(f64, usize)> = p_out[i].iter().map(|&f| (-1.0, f)).collect();
            funcs.push((-b.g_shunt, sh));
            eq.push(Row::Mixed { lin: lin.clone(), funcs, constant: -b.p_load });
            lin = gens_at[i].iter().map(|&g| (lay.qg(g), 1.0)).collect();
            let mut funcs: Vec<(f64, usize)> = q_out[i].iter().map(|&f| (-1.0, f)).collect();
            funcs.push((b.b_shunt, sh));
            eq.push(Row::Mixed { lin, funcs, constant: -b.q_load });
        }
        eq.push(Row::Mixed { lin: vec![(lay.theta(net.ref_bus), 1.0)], funcs: vec![], constant: 0.0 });
        let bound = |k: usize, lo: f64, hi: f64, eq: &mut Vec<Row>, ineq: &mut Vec<Row>| {
            if hi - lo <= 1e-9 {
                eq.push(Row::Mixed { lin: vec![(k, 1.0)], funcs: vec![], constant: -0.5 * (lo + hi) });
            } else {
                ineq.push(Row::Mixed { lin: vec![(k, -1.0)], funcs: vec![], constant: lo });
                ineq.push(Row::Mixed { lin: vec![(k, 1.0)], funcs: vec![], constant: -hi });
            }
        };
        for (i, b) in net.buses.iter().enumerate() {
            bound(lay.v(i), b.v_min, b.v_max, &mut eq, &mut ineq);
        }
        for (g, gen) in net.generators.iter().enumerate() {
            bound(lay.pg(g), gen.p_min, gen.p_max, &mut eq, &mut ineq);
            bound(lay.qg(g), gen.q_min, gen.q_max, &mut eq, &mut ineq);
        }
        Problem { net, lay, eq, ineq, scale: cost_scale(net) }
    }

    fn funcs(&self, x: &DVector<f64>) -> Vec<Func> {
        let lay = &self.lay;
        let mut out = Vec::with_capacity(4 * self.net.branches.len() + lay.nb);
        for br in &self.net.branches {
            let idx = [lay.theta(br.from), lay.theta(br.to), lay.v(br.from), lay.v(br.to)];
            let [c, s, ii, jj] = pair_terms(x[idx[0]], x[idx[1]], x[idx[2]], x[idx[3]]);
            let rows = br.flow_rows();
            for (r, diag) in rows.iter().zip([&ii, &ii, &jj, &jj]) {
                out.push(Func { idx, f: Local::combine(&[(r.diag, diag), (r.c, &c), (r.s, &s)]) });
            }
        }
        for i in 0..lay.nb {
            let v = x[lay.v(i)];
            let mut f = Local { val: v * v, ..Default::default() };
            f.grad[2] = 2.0 * v;
            f.hess[2][2] = 2.0;
            out.push(Func { idx: [0, 0, lay.v(i), 0], f });
        }
        out
    }

    fn objective(&self, x: &DVector<f64>) -> (f64, DVector<f64>, Vec<(usize, f64)>) {
        let mut f = 0.0;
        let mut df = DVector::zeros(self.lay.n());
        let mut d2 = Vec::new();
        for (g, gen) in self.net.generators.iter().enumerate() {
            let k = self.lay.pg(g);
            let p = x[k];
            f += (gen.cost[0] + gen.cost[1] * p + gen.cost[2] * p * p) / self.scale;
            df[k] = (gen.cost[1] + 2.0 * gen.cost[2] * p) / self.scale;
            d2.push((k, 2.0 * gen.cost[2] / self.scale));
        }
        (f, df, d2)
    }

    /// Row values and Jacobian.
    fn rows(&self, rows: &[Row], funcs: &[Func], x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.lay.n();
        let mut val = DVector::zeros(rows.len());
        let mut jac = DMatrix::zeros(rows.len(), n);
        for (r, row) in rows.iter().enumerate() {
            match row {
                Row::Mixed { lin, funcs: fs, constant } => {
                    let mut v = *constant;
                    for &(k, a) in lin {
                        v += a * x[k];
                        jac[(r, k)] += a;
                    }
                    for &(a, fi) in fs {
                        let f = &funcs[fi];
                        v += a * f.f.val;
                        for l in 0..4 {
                            jac[(r, f.idx[l])] += a * f.f.grad[l];
                        }
                    }
                    val[r] = v;
                }
                Row::Thermal { p, q, rate } => {
                    let (fp, fq) = (&funcs[*p], &funcs[*q]);
                    val[r] = fp.f.val * fp.f.val + fq.f.val * fq.f.val - rate * rate;
                    for l in 0..4 {
                        jac[(r, fp.idx[l])] += 2.0 * (fp.f.val * fp.f.grad[l] + fq.f.val * fq.f.grad[l]);
                    }
                }
            }
        }
        (val, jac)
    }

    fn add_hessian(&self, rows: &[Row], funcs: &[Func], mult: &DVector<f64>, hess: &mut DMatrix<f64>) {
        let add_local = |f: &Func, k: f64, hess: &mut DMatrix<f64>| {
            for a in 0..4 {
                for b in 0..4 {
                    hess[(f.idx[a], f.idx[b])] += k * f.f.hess[a][b];
                }
            }
        };
        for (r, row) in rows.iter().enumerate() {
            let m = mult[r];
            if m == 0.0 {
                continue;
            }
            match row {
                Row::Mixed { funcs: fs, .. } => {
                    for &(a, fi) in fs {
                        add_local(&funcs[fi], m * a, hess);
                    }
                }
                Row::Thermal { p, q, .. } => {
                    for f in [&funcs[*p], &funcs[*q]] {
                        add_local(f, 2.0 * m * f.f.val, hess);
                        for a in 0..4 {
                            for b in 0..4 {
                                hess[(f.idx[a], f.idx[b])] += 2.0 * m * f.f.grad[a] * f.f.grad[b];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Solves the AC OPF locally from `start` (voltages and dispatch). Returns
/// the point the iteration converged to, if it did.
pub fn local_opf(net: &PowerNetwork, start: &AcPoint) -> Option<AcPoint> {
    let prob = Problem::new(net);
    let lay = &prob.lay;
    let n = lay.n();
    let mut x = DVector::zeros(n);
    for i in 0..lay.nb {
        x[lay.theta(i)] = start.v[i].arg() - start.v[net.ref_bus].arg();
        let b = &net.buses[i];
        x[lay.v(i)] = start.v[i].norm().clamp(b.v_min, b.v_max);
    }
    for (g, gen) in net.generators.iter().enumerate() {
        x[lay.pg(g)] = start.pg[g].clamp(gen.p_min, gen.p_max);
        x[lay.qg(g)] = start.qg[g].clamp(gen.q_min, gen.q_max);
    }
    let neq = prob.eq.len();
    let ni = prob.ineq.len();
    let funcs = prob.funcs(&x);
    let (mut h, _) = prob.rows(&prob.ineq, &funcs, &x);
    let mut z = DVector::from_fn(ni, |k, _| if h[k] < -1.0 { -h[k] } else { 1.0 });
    let mut gamma = 1.0;
    let mut mu = DVector::from_fn(ni, |k, _| gamma / z[k]);
    let mut lam = DVector::zeros(neq);
    let xi = 0.99995;
    let sigma = 0.1;
    for _ in 0..150 {
        let funcs = prob.funcs(&x);
        let (f, df, d2f) = prob.objective(&x);
        let (g, jg) = prob.rows(&prob.eq, &funcs, &x);
        let (hv, jh) = prob.rows(&prob.ineq, &funcs, &x);
        h = hv;
        let lx = &df + jg.transpose() * &lam + jh.transpose() * &mu;
        let feas = g.amax().max(h.max().max(0.0)) / (1.0 + x.amax().max(z.amax()));
        let grad = lx.amax() / (1.0 + lam.amax().max(mu.amax()));
        let comp = z.dot(&mu) / (1.0 + x.amax());
        if feas < 1e-9 && grad < 1e-7 && comp < 1e-8 {
            return Some(to_point(net, lay, &x));
        }
        let _ = f;
        let mut hess = DMatrix::zeros(n, n);
        for &(k, v) in &d2f {
            hess[(k, k)] += v;
        }
        prob.add_hessian(&prob.eq, &funcs, &lam, &mut hess);
        prob.add_hessian(&prob.ineq, &funcs, &mu, &mut hess);
        let zinv = z.map(|v| 1.0 / v);
        let dmu = mu.component_mul(&zinv);
        let m = &hess + jh.transpose() * DMatrix::from_diagonal(&dmu) * &jh;
        let rhs_h = (DVector::from_element(ni, gamma) + mu.component_mul(&h)).component_mul(&zinv);
        let nvec = &lx + jh.transpose() * rhs_h;
        let mut kkt = DMatrix::zeros(n + neq, n + neq);
        kkt.view_mut((0, 0), (n, n)).copy_from(&m);
        kkt.view_mut((0, n), (n, neq)).copy_from(&jg.transpose());
        kkt.view_mut((n, 0), (neq, n)).copy_from(&jg);
        let mut rhs = DVector::zeros(n + neq);
        rhs.rows_mut(0, n).copy_from(&(-&nvec));
        rhs.rows_mut(n, neq).copy_from(&(-&g));
        let sol = kkt.lu().solve(&rhs)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dx = sol.rows(0, n).into_owned();
        let dlam = sol.rows(n, neq).into_owned();
        let dz = -&h - &z - &jh * &dx;
        let dmu_step = -&mu + (DVector::from_element(ni, gamma) - mu.component_mul(&dz)).component_mul(&zinv);
        let step = |v: &DVector<f64>, dv: &DVector<f64>| {
            let mut a: f64 = 1.0;
            for k in 0..v.len() {
                if dv[k] < 0.0 {
                    a = a.min(xi * -v[k] / dv[k]);
                }
            }
            a
        };
        let ap = step(&z, &dz);
        let ad = step(&mu, &dmu_step);
        x += ap * dx;
        z += ap * dz;
        lam += ad * dlam;
        mu += ad * dmu_step;
        gamma = sigma * z.dot(&mu) / ni.max(1) as f64;
    }
    None
}

fn to_point(net: &PowerNetwork, lay: &Layout, x: &DVector<f64>) -> AcPoint {
    let v = (0..lay.nb).map(|i| Complex64::from_polar(x[lay.v(i)], x[lay.theta(i)])).collect();
    let pg = (0..net.generators.len()).map(|g| x[lay.pg(g)]).collect();
    let qg = (0..net.generators.len()).map(|g| x[lay.qg(g)]).collect();
    AcPoint { v, pg, qg }
}
