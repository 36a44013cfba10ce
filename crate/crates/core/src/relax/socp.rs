use acopf_conic::{BoundRows, LinExpr, Model, ModelSolution, Sense, SolveStatus, SolverConfig, Var};
use log::debug;

use super::{arctan_envelope, edge_cut_coefficients, LiftedPoint, LinearCut, VarRef, VariableBounds};
use crate::case::PowerNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelaxOptions {
    pub edge_cuts: bool,
    pub arctan: bool,
}

impl RelaxOptions {
    pub const PLAIN: RelaxOptions = RelaxOptions { edge_cuts: false, arctan: false };
    pub const STRENGTHENED: RelaxOptions = RelaxOptions { edge_cuts: true, arctan: true };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    Cost,
    Minimize(VarRef),
    Maximize(VarRef),
}

/// Buses whose balance rows are kept and edges whose variables are kept.
/// Every edge incident to a balance bus must be listed.
#[derive(Clone, Debug, PartialEq)]
pub struct Scope {
    pub balance: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Scope {
    pub fn full(net: &PowerNetwork) -> Self {
        Self { balance: (0..net.num_buses()).collect(), edges: (0..net.edges.len()).collect() }
    }
}

/// A relaxation ready to solve, with the variable and bound-row maps needed
/// to read values and multipliers back.
pub struct RelaxationModel {
    pub model: Model,
    pub cii: Vec<Option<Var>>,
    pub c: Vec<Option<Var>>,
    pub s: Vec<Option<Var>>,
    pub theta: Vec<Option<Var>>,
    pub pg: Vec<Option<Var>>,
    pub qg: Vec<Option<Var>>,
    pub c_rows: Vec<Option<BoundRows>>,
    pub s_rows: Vec<Option<BoundRows>>,
    pub edge_cut_rows: usize,
    pub arctan_rows: usize,
    pub cut_rows: usize,
    /// Factor mapping the model objective back to the original units.
    pub objective_scale: f64,
}

#[derive(Clone, Debug)]
pub struct RelaxationSolution {
    pub status: SolveStatus,
    pub objective: f64,
    /// Entries outside the model's scope are NaN.
    pub point: LiftedPoint,
    pub pg: Vec<f64>,
    pub qg: Vec<f64>,
    pub raw: ModelSolution,
}

impl RelaxationSolution {
    /// Optimal, or stopped at a limit with residuals below `tol`.
    pub fn is_usable(&self, tol: f64) -> bool {
        self.raw.is_usable(tol)
    }
}

impl RelaxationModel {
    pub fn var(&self, v: VarRef) -> Option<Var> {
        match v {
            VarRef::Cii(i) => self.cii[i],
            VarRef::C(e) => self.c[e],
            VarRef::S(e) => self.s[e],
        }
    }

    pub fn solve(&self, cfg: &SolverConfig) -> RelaxationSolution {
        let raw = match self.model.solve(cfg) {
            Ok(r) => r,
            Err(e) => panic!("relaxation lowered to an invalid conic program: {e}"),
        };
        let get = |v: &Option<Var>| v.map_or(f64::NAN, |v| raw.value(v));
        let point = LiftedPoint {
            cii: self.cii.iter().map(get).collect(),
            c: self.c.iter().map(get).collect(),
            s: self.s.iter().map(get).collect(),
            theta: self.theta.iter().map(get).collect(),
        };
        RelaxationSolution {
            status: raw.status,
            objective: raw.objective * self.objective_scale,
            pg: self.pg.iter().map(get).collect(),
            qg: self.qg.iter().map(get).collect(),
            point,
            raw,
        }
    }
}

/// The relaxation over the whole network.
pub fn build_socp(
    net: &PowerNetwork,
    bounds: &VariableBounds,
    cuts: &[LinearCut],
    opts: RelaxOptions,
) -> RelaxationModel {
    build_scoped(net, bounds, cuts, opts, &Scope::full(net), Objective::Cost)
}

/// The relaxation restricted to `scope`: balance rows for the scope's buses,
/// variables for the scope's edges and their end buses, thermal, cone, edge
/// cut and arctangent rows for those edges, and the cuts whose variables are
/// all present.
pub fn build_scoped(
    net: &PowerNetwork,
    bounds: &VariableBounds,
    cuts: &[LinearCut],
    opts: RelaxOptions,
    scope: &Scope,
    objective: Objective,
) -> RelaxationModel {
    let nb = net.num_buses();
    let ne = net.edges.len();
    let ng = net.generators.len();
    let mut m = Model::new();
    let mut rm = RelaxationModel {
        model: Model::new(),
        cii: vec![None; nb],
        c: vec![None; ne],
        s: vec![None; ne],
        theta: vec![None; nb],
        pg: vec![None; ng],
        qg: vec![None; ng],
        c_rows: vec![None; ne],
        s_rows: vec![None; ne],
        edge_cut_rows: 0,
        arctan_rows: 0,
        cut_rows: 0,
        objective_scale: 1.0,
    };

    let mut in_scope = vec![false; nb];
    for &i in &scope.balance {
        in_scope[i] = true;
    }
    for &e in &scope.edges {
        in_scope[net.edges[e].from] = true;
        in_scope[net.edges[e].to] = true;
    }
    for i in 0..nb {
        if in_scope[i] {
            let v = m.add_var();
            m.add_bounds(v, bounds.bus[i].lo, bounds.bus[i].hi);
            rm.cii[i] = Some(v);
            rm.theta[i] = Some(m.add_var());
        }
    }
    let theta_ref = if in_scope[net.ref_bus] { net.ref_bus } else { (0..nb).find(|&i| in_scope[i]).unwrap_or(0) };
    if let Some(t) = rm.theta[theta_ref] {
        m.add_row(t.into(), Sense::Eq, 0.0);
    }
    for &e in &scope.edges {
        let b = &bounds.edges[e];
        let c = m.add_var();
        let s = m.add_var();
        rm.c_rows[e] = Some(m.add_bounds(c, b.c.lo, b.c.hi));
        rm.s_rows[e] = Some(m.add_bounds(s, b.s.lo, b.s.hi));
        rm.c[e] = Some(c);
        rm.s[e] = Some(s);
    }

    // Flow rows, as affine expressions, at both ends of every in-scope branch.
    let mut bus_flows: Vec<(LinExpr, LinExpr)> = vec![(LinExpr::new(), LinExpr::new()); nb];
    for &e in &scope.edges {
        let ed = &net.edges[e];
        let (c, s) = (rm.c[e].unwrap(), rm.s[e].unwrap());
        for &(k, reversed) in &ed.branches {
            let br = &net.branches[k];
            let sgn = if reversed { -1.0 } else { 1.0 };
            let rows = br.flow_rows();
            let mut ends = Vec::with_capacity(2);
            for (end, bus) in [(0usize, br.from), (1, br.to)] {
                let cii = rm.cii[bus].unwrap();
                let mk = |r: &crate::case::FlowRow| {
                    LinExpr::term(cii, r.diag).plus(c, r.c).plus(s, sgn * r.s)
                };
                let p = mk(&rows[2 * end]);
                let q = mk(&rows[2 * end + 1]);
                bus_flows[bus].0.add_expr(&p, 1.0);
                bus_flows[bus].1.add_expr(&q, 1.0);
                ends.push((p, q));
            }
            if let Some(rate) = br.rate {
                for (p, q) in ends {
                    m.add_soc(vec![LinExpr::constant(rate), p, q]);
                }
            }
        }
    }

    let gens_at = net.gens_at();
    let scale = cost_scale(net);
    let mut cost = LinExpr::new();
    for &i in &scope.balance {
        let bus = &net.buses[i];
        let cii = rm.cii[i].unwrap();
        let mut p = LinExpr::new();
        let mut q = LinExpr::new();
        for &g in &gens_at[i] {
            let gen = &net.generators[g];
            let pv = m.add_var();
            let qv = m.add_var();
            m.add_bounds(pv, gen.p_min, gen.p_max);
            m.add_bounds(qv, gen.q_min, gen.q_max);
            rm.pg[g] = Some(pv);
            rm.qg[g] = Some(qv);
            p.add(pv, 1.0);
            q.add(qv, 1.0);
            cost.add(pv, gen.cost[1] / scale);
            cost.constant += gen.cost[0] / scale;
            if gen.cost[2] > 0.0 {
                // t >= c2 p^2 / scale as 2 t (1/2) >= (sqrt(c2 / scale) p)^2.
                let t = m.add_var();
                m.add_rsoc(vec![t.into(), LinExpr::constant(0.5), LinExpr::term(pv, (gen.cost[2] / scale).sqrt())]);
                cost.add(t, 1.0);
            }
        }
        p.add(cii, -bus.g_shunt);
        q.add(cii, bus.b_shunt);
        p.add_expr(&bus_flows[i].0, -1.0);
        q.add_expr(&bus_flows[i].1, -1.0);
        m.add_row(p, Sense::Eq, bus.p_load);
        m.add_row(q, Sense::Eq, bus.q_load);
    }

    for &e in &scope.edges {
        let ed = &net.edges[e];
        let (ci, cj) = (rm.cii[ed.from].unwrap(), rm.cii[ed.to].unwrap());
        let (c, s) = (rm.c[e].unwrap(), rm.s[e].unwrap());
        let (ti, tj) = (rm.theta[ed.from].unwrap(), rm.theta[ed.to].unwrap());
        let b = &bounds.edges[e];
        m.add_rsoc(vec![LinExpr::term(ci, 0.5), cj.into(), c.into(), s.into()]);
        let dtheta = LinExpr::term(tj, 1.0).plus(ti, -1.0);
        m.add_bounds_expr(dtheta.clone(), b.theta.lo, b.theta.hi);
        if opts.edge_cuts {
            let k = edge_cut_coefficients(bounds.bus[ed.from], bounds.bus[ed.to], b.c, b.s);
            for r in k.rows() {
                let row = LinExpr::term(ci, r[0]).plus(cj, r[1]).plus(c, r[2]).plus(s, r[3]);
                m.add_row(row, Sense::Ge, r[4]);
                rm.edge_cut_rows += 1;
            }
        }
        if opts.arctan {
            match arctan_envelope(b.c, b.s, b.theta) {
                Some(env) => {
                    for p in &env.upper {
                        let row = dtheta.clone().plus(c, -p.alpha).plus(s, -p.beta);
                        m.add_row(row, Sense::Le, p.gamma);
                    }
                    for p in &env.lower {
                        let row = dtheta.clone().plus(c, -p.alpha).plus(s, -p.beta);
                        m.add_row(row, Sense::Ge, p.gamma);
                    }
                    rm.arctan_rows += 4;
                }
                None => debug!("arctangent envelopes omitted for edge {e}"),
            }
        }
    }

    for cut in cuts {
        let mut row = LinExpr::new();
        let mut ok = true;
        for &(v, a) in &cut.coeffs {
            match rm.var(v) {
                Some(x) => row.add(x, a),
                None => ok = false,
            }
        }
        if ok {
            m.add_row(row, Sense::Ge, cut.rhs);
            rm.cut_rows += 1;
        }
    }

    match objective {
        Objective::Cost => {
            m.minimize(cost);
            rm.objective_scale = scale;
        }
        Objective::Minimize(v) => m.minimize(rm.var(v).expect("objective variable outside scope").into()),
        Objective::Maximize(v) => m.maximize(rm.var(v).expect("objective variable outside scope").into()),
    }
    rm.model = m;
    rm
}

/// Divisor applied to the cost objective so that it is of order one.
pub fn cost_scale(net: &PowerNetwork) -> f64 {
    net.generators.iter().map(|g| g.cost[1].abs().max(g.cost[2].abs())).fold(1.0, f64::max)
}

/// `|theta_to - theta_from - atan2(s, c)|` of one edge.
pub fn theta_mismatch(net: &PowerNetwork, p: &LiftedPoint, e: usize) -> f64 {
    let ed = &net.edges[e];
    let (c, s) = (p.c[e], p.s[e]);
    let phi = if c == 0.0 && s == 0.0 { 0.0 } else { s.atan2(c) };
    (p.theta[ed.to] - p.theta[ed.from] - phi).abs()
}
