use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CaseError, RawCase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: i64,
    /// MATPOWER bus type: 1 PQ, 2 PV, 3 reference.
    pub kind: u8,
    pub p_load: f64,
    pub q_load: f64,
    pub g_shunt: f64,
    pub b_shunt: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_set: f64,
}

/// Cost `c[0] + c[1] p + c[2] p^2` with `p` in per unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub cost: [f64; 3],
    pub v_set: f64,
}

impl Generator {
    pub fn cost_at(&self, p: f64) -> f64 {
        self.cost[0] + self.cost[1] * p + self.cost[2] * p * p
    }
}

/// Pi-model blocks: `I_f = ff V_f + ft V_t`, `I_t = tf V_f + tt V_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchAdmittance {
    pub ff: Complex64,
    pub ft: Complex64,
    pub tf: Complex64,
    pub tt: Complex64,
}

impl BranchAdmittance {
    pub fn new(r: f64, x: f64, b: f64, tap: f64, shift: f64) -> Self {
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
        let t = Complex64::from_polar(tap, shift);
        let half = Complex64::new(0.0, 0.5 * b);
        Self {
            ff: (ys + half) / (tap * tap),
            ft: -ys / t.conj(),
            tf: -ys / t,
            tt: ys + half,
        }
    }
}

/// A power-flow row `diag * c_ii + c * c_ij + s * s_ij`, where `i` is the
/// bus at which the flow is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FlowRow {
    pub diag: f64,
    pub c: f64,
    pub s: f64,
}

impl FlowRow {
    pub fn eval(&self, cii: f64, c: f64, s: f64) -> f64 {
        self.diag * cii + self.c * c + self.s * s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub b: f64,
    /// Apparent-power limit in per unit; `None` when unlimited.
    pub rate: Option<f64>,
    pub tap: f64,
    /// Phase shift in radians.
    pub shift: f64,
    /// Limits on `theta_from - theta_to` in radians.
    pub angle_min: f64,
    pub angle_max: f64,
    pub y: BranchAdmittance,
}

impl Branch {
    /// Active and reactive flow rows at the from and to ends, in terms of the
    /// branch-oriented `(c_ft, s_ft)`:
    /// `[p_from, q_from, p_to, q_to]`.
    pub fn flow_rows(&self) -> [FlowRow; 4] {
        let y = &self.y;
        [
            FlowRow { diag: y.ff.re, c: y.ft.re, s: -y.ft.im },
            FlowRow { diag: -y.ff.im, c: -y.ft.im, s: -y.ft.re },
            FlowRow { diag: y.tt.re, c: y.tf.re, s: y.tf.im },
            FlowRow { diag: -y.tt.im, c: -y.tf.im, s: y.tf.re },
        ]
    }

    /// Complex power entering the branch at each end.
    pub fn flows(&self, vf: Complex64, vt: Complex64) -> (Complex64, Complex64) {
        let y = &self.y;
        let sf = vf * (y.ff * vf + y.ft * vt).conj();
        let st = vt * (y.tf * vf + y.tt * vt).conj();
        (sf, st)
    }
}

/// A bus pair carrying one or more parallel branches. The lifted variables
/// `(c, s)` of the relaxation live on edges and are oriented `from -> to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// `(branch index, reversed)`; reversed branches run `to -> from`.
    pub branches: Vec<(usize, bool)>,
    /// Box on `theta_to - theta_from` in radians, before any clamping.
    pub theta: (f64, f64),
}

impl Edge {
    pub fn other(&self, bus: usize) -> usize {
        if bus == self.from {
            self.to
        } else {
            self.from
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerNetwork {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub branches: Vec<Branch>,
    pub edges: Vec<Edge>,
    pub ref_bus: usize,
}

impl PowerNetwork {
    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_index(&self, id: i64) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Generators attached to each bus.
    pub fn gens_at(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.buses.len()];
        for (k, g) in self.generators.iter().enumerate() {
            out[g.bus].push(k);
        }
        out
    }

    /// Edges incident to each bus.
    pub fn incident_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.buses.len()];
        for (e, ed) in self.edges.iter().enumerate() {
            out[ed.from].push(e);
            out[ed.to].push(e);
        }
        out
    }

    /// Edge joining two buses, if any.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.iter().position(|e| (e.from == a && e.to == b) || (e.from == b && e.to == a))
    }

    pub fn cost(&self, pg: &[f64]) -> f64 {
        self.generators.iter().zip(pg).map(|(g, &p)| g.cost_at(p)).sum()
    }
}

fn col(row: &[f64], k: usize) -> f64 {
    row.get(k).copied().unwrap_or(0.0)
}

fn bus_id(v: f64) -> i64 {
    v.round() as i64
}

fn angle_limit(deg: f64, default: f64) -> f64 {
    if !deg.is_finite() || deg.abs() >= 360.0 {
        default
    } else {
        deg.to_radians()
    }
}

/// Converts a raw case to per unit, drops out-of-service elements, builds the
/// pi-model admittances and groups parallel branches into edges.
pub fn build_network(raw: &RawCase) -> Result<PowerNetwork, CaseError> {
    let base = raw.base_mva;
    let mut buses = Vec::with_capacity(raw.bus.len());
    let mut index = BTreeMap::new();
    for row in &raw.bus {
        let id = bus_id(row[0]);
        if index.insert(id, buses.len()).is_some() {
            return Err(CaseError::DuplicateBus(id));
        }
        let (v_max, v_min) = (col(row, 11), col(row, 12));
        if !(v_min >= 0.0 && v_min <= v_max) {
            return Err(CaseError::Invalid(format!("bus {id} has voltage limits [{v_min}, {v_max}]")));
        }
        buses.push(Bus {
            id,
            kind: col(row, 1) as u8,
            p_load: col(row, 2) / base,
            q_load: col(row, 3) / base,
            g_shunt: col(row, 4) / base,
            b_shunt: col(row, 5) / base,
            v_min,
            v_max,
            v_set: col(row, 7),
        });
    }
    let lookup = |v: f64, what: String| -> Result<usize, CaseError> {
        let id = bus_id(v);
        index.get(&id).copied().ok_or(CaseError::UnknownBus { bus: id, what })
    };

    if raw.gencost.len() < raw.gen.len() {
        return Err(CaseError::UnsupportedCost(format!(
            "{} cost rows for {} generators",
            raw.gencost.len(),
            raw.gen.len()
        )));
    }
    let mut generators = Vec::new();
    for (k, row) in raw.gen.iter().enumerate() {
        if col(row, 7) <= 0.0 {
            continue;
        }
        let bus = lookup(row[0], format!("generator {}", k + 1))?;
        let cost = convert_cost(&raw.gencost[k], base, k)?;
        let g = Generator {
            bus,
            p_min: col(row, 9) / base,
            p_max: col(row, 8) / base,
            q_min: col(row, 4) / base,
            q_max: col(row, 3) / base,
            cost,
            v_set: col(row, 5),
        };
        if g.p_min > g.p_max || g.q_min > g.q_max {
            return Err(CaseError::Invalid(format!("generator {} has crossed limits", k + 1)));
        }
        generators.push(g);
    }

    let mut branches = Vec::new();
    for (k, row) in raw.branch.iter().enumerate() {
        if col(row, 10) <= 0.0 {
            continue;
        }
        let from = lookup(row[0], format!("branch {}", k + 1))?;
        let to = lookup(row[1], format!("branch {}", k + 1))?;
        if from == to {
            return Err(CaseError::Invalid(format!("branch {} is a self-loop", k + 1)));
        }
        let (r, x, b) = (col(row, 2), col(row, 3), col(row, 4));
        if r == 0.0 && x == 0.0 {
            return Err(CaseError::Invalid(format!("branch {} has zero impedance", k + 1)));
        }
        let tap = if col(row, 8) == 0.0 { 1.0 } else { col(row, 8) };
        let shift = col(row, 9).to_radians();
        let rate = match col(row, 5) {
            v if v > 0.0 => Some(v / base),
            _ => None,
        };
        let angle_min = angle_limit(col(row, 11), -2.0 * PI);
        let angle_max = angle_limit(col(row, 12), 2.0 * PI);
        if angle_min > angle_max {
            return Err(CaseError::Invalid(format!("branch {} has crossed angle limits", k + 1)));
        }
        branches.push(Branch {
            from,
            to,
            r,
            x,
            b,
            rate,
            tap,
            shift,
            angle_min,
            angle_max,
            y: BranchAdmittance::new(r, x, b, tap, shift),
        });
    }

    let mut edges: Vec<Edge> = Vec::new();
    let mut pair_index = BTreeMap::new();
    for (k, br) in branches.iter().enumerate() {
        let key = (br.from.min(br.to), br.from.max(br.to));
        // Box on theta_to - theta_from in the branch's own orientation.
        let own = (-br.angle_max, -br.angle_min);
        match pair_index.get(&key) {
            Some(&e) => {
                let edge: &mut Edge = &mut edges[e];
                let reversed = edge.from != br.from;
                let th = if reversed { (-own.1, -own.0) } else { own };
                edge.theta = (edge.theta.0.max(th.0), edge.theta.1.min(th.1));
                if edge.theta.0 > edge.theta.1 {
                    return Err(CaseError::Invalid(format!(
                        "parallel branches between buses {} and {} have disjoint angle limits",
                        buses[key.0].id, buses[key.1].id
                    )));
                }
                edge.branches.push((k, reversed));
            }
            None => {
                pair_index.insert(key, edges.len());
                edges.push(Edge { from: br.from, to: br.to, branches: vec![(k, false)], theta: own });
            }
        }
    }

    let ref_bus = buses
        .iter()
        .position(|b| b.kind == 3)
        .or_else(|| {
            generators
                .iter()
                .max_by(|a, b| a.p_max.total_cmp(&b.p_max))
                .map(|g| g.bus)
        })
        .unwrap_or(0);

    let net = PowerNetwork {
        name: raw.name.clone().unwrap_or_else(|| "case".into()),
        base_mva: base,
        buses,
        generators,
        branches,
        edges,
        ref_bus,
    };
    check_connected(&net)?;
    Ok(net)
}

fn convert_cost(row: &[f64], base: f64, k: usize) -> Result<[f64; 3], CaseError> {
    if col(row, 0) as i64 != 2 {
        return Err(CaseError::UnsupportedCost(format!(
            "generator {} uses cost model {}, only polynomial (2) is supported",
            k + 1,
            col(row, 0)
        )));
    }
    let n = col(row, 3) as usize;
    if row.len() < 4 + n {
        return Err(CaseError::UnsupportedCost(format!("generator {} lists fewer than {n} coefficients", k + 1)));
    }
    // Coefficients are listed from the highest degree down.
    let coeffs = &row[4..4 + n];
    let mut out = [0.0; 3];
    for (i, &c) in coeffs.iter().enumerate() {
        let deg = n - 1 - i;
        if deg > 2 {
            if c != 0.0 {
                return Err(CaseError::UnsupportedCost(format!("generator {} has a degree-{deg} term", k + 1)));
            }
            continue;
        }
        out[deg] = c * base.powi(deg as i32);
    }
    if out[2] < 0.0 {
        return Err(CaseError::UnsupportedCost(format!("generator {} has a concave cost", k + 1)));
    }
    Ok(out)
}

fn check_connected(net: &PowerNetwork) -> Result<(), CaseError> {
    let n = net.buses.len();
    let inc = net.incident_edges();
    let mut comp = vec![usize::MAX; n];
    let mut groups: Vec<Vec<i64>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let c = groups.len();
        groups.push(Vec::new());
        comp[s] = c;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            groups[c].push(net.buses[u].id);
            for &e in &inc[u] {
                let v = net.edges[e].other(u);
                if comp[v] == usize::MAX {
                    comp[v] = c;
                    q.push_back(v);
                }
            }
        }
    }
    if groups.len() > 1 {
        for g in &mut groups {
            g.sort_unstable();
        }
        return Err(CaseError::Disconnected(groups));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_matpower_case;

    const MINI: &str = "function mpc = mini
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;
  2 1 50 10 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [1 0 0 100 -100 1 100 1 200 0];
mpc.branch = [
  1 2 0 1 0 100 0 0 0 0 1 -30 30;
];
mpc.gencost = [2 0 0 3 0.5 10 2];
";

    #[test]
    fn one_branch_case() {
        let net = build_network(&parse_matpower_case(MINI).unwrap()).unwrap();
        let br = &net.branches[0];
        assert_eq!((br.from, br.to), (0, 1));
        assert_eq!(br.x, 1.0);
        assert_eq!(br.rate, Some(1.0));
        assert!((br.angle_max - 30f64.to_radians()).abs() < 1e-15);
        assert!((br.y.ft - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((br.y.ff - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(net.buses[1].p_load, 0.5);
        assert_eq!(net.generators[0].cost, [2.0, 1000.0, 5000.0]);
        assert_eq!(net.edges.len(), 1);
        assert_eq!(net.ref_bus, 0);
    }

    #[test]
    fn disconnected_network_lists_components() {
        let t = MINI.replace("mpc.branch = [\n  1 2 0 1 0 100 0 0 0 0 1 -30 30;\n];", "mpc.branch = [\n  1 2 0 1 0 100 0 0 0 0 0 -30 30;\n];");
        match build_network(&parse_matpower_case(&t).unwrap()) {
            Err(CaseError::Disconnected(c)) => assert_eq!(c, vec![vec![1], vec![2]]),
            other => panic!("expected disconnection, got {other:?}"),
        }
    }

    #[test]
    fn parallel_branches_share_an_edge() {
        let t = MINI.replace(
            "1 2 0 1 0 100 0 0 0 0 1 -30 30;",
            "1 2 0 1 0 100 0 0 0 0 1 -30 30;\n  2 1 0 2 0 100 0 0 0 0 1 -20 10;",
        );
        let net = build_network(&parse_matpower_case(&t).unwrap()).unwrap();
        assert_eq!(net.branches.len(), 2);
        assert_eq!(net.edges.len(), 1);
        assert_eq!(net.edges[0].branches, vec![(0, false), (1, true)]);
        // Branch 2 -> 1 limits theta_2 - theta_1, which is the edge's own angle.
        let th = net.edges[0].theta;
        assert!((th.0 - (-20f64).to_radians()).abs() < 1e-15);
        assert!((th.1 - 10f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn tap_and_shift_blocks() {
        let y = BranchAdmittance::new(0.01, 0.1, 0.02, 0.95, 0.1);
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(0.01, 0.1);
        let t = Complex64::from_polar(0.95, 0.1);
        assert!((y.ft - (-ys / t.conj())).norm() < 1e-12);
        assert!((y.tf - (-ys / t)).norm() < 1e-12);
        assert!((y.ff * t * t.conj() - (ys + Complex64::new(0.0, 0.01))).norm() < 1e-12);
    }

    #[test]
    fn flow_rows_match_direct_evaluation() {
        let br = Branch {
            from: 0,
            to: 1,
            r: 0.02,
            x: 0.2,
            b: 0.1,
            rate: None,
            tap: 1.05,
            shift: 0.05,
            angle_min: -1.0,
            angle_max: 1.0,
            y: BranchAdmittance::new(0.02, 0.2, 0.1, 1.05, 0.05),
        };
        let vf = Complex64::from_polar(1.03, 0.1);
        let vt = Complex64::from_polar(0.97, -0.2);
        let x = vf * vt.conj();
        let (c, s) = (x.re, -x.im);
        let (sf, st) = br.flows(vf, vt);
        let rows = br.flow_rows();
        assert!((rows[0].eval(vf.norm_sqr(), c, s) - sf.re).abs() < 1e-12);
        assert!((rows[1].eval(vf.norm_sqr(), c, s) - sf.im).abs() < 1e-12);
        assert!((rows[2].eval(vt.norm_sqr(), c, s) - st.re).abs() < 1e-12);
        assert!((rows[3].eval(vt.norm_sqr(), c, s) - st.im).abs() < 1e-12);
    }

    #[test]
    fn rejects_piecewise_costs() {
        let t = MINI.replace("mpc.gencost = [2 0 0 3 0.5 10 2];", "mpc.gencost = [1 0 0 2 0 0 100 1000];");
        assert!(matches!(build_network(&parse_matpower_case(&t).unwrap()), Err(CaseError::UnsupportedCost(_))));
    }
}
