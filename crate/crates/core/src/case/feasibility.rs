use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PowerNetwork;

/// A candidate AC operating point in per unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcPoint {
    pub v: Vec<Complex64>,
    pub pg: Vec<f64>,
    pub qg: Vec<f64>,
}

impl AcPoint {
    /// Lifted image `(c_ii, c_e, s_e)`.
    pub fn lifted(&self, net: &PowerNetwork) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let cii = self.v.iter().map(|v| v.norm_sqr()).collect();
        let mut c = Vec::with_capacity(net.edges.len());
        let mut s = Vec::with_capacity(net.edges.len());
        for e in &net.edges {
            let x = self.v[e.from] * self.v[e.to].conj();
            c.push(x.re);
            s.push(-x.im);
        }
        (cii, c, s)
    }
}

/// Largest violation of each constraint family, all in per unit (angles in radians).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub p_mismatch: Vec<f64>,
    pub q_mismatch: Vec<f64>,
    pub balance: f64,
    pub voltage: f64,
    pub gen_p: f64,
    pub gen_q: f64,
    pub thermal: f64,
    pub angle: f64,
}

impl FeasibilityReport {
    pub fn max_violation(&self) -> f64 {
        [self.balance, self.voltage, self.gen_p, self.gen_q, self.thermal, self.angle]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Evaluates every AC OPF constraint at `point` directly from the complex
/// voltages.
pub fn evaluate_ac_feasibility(net: &PowerNetwork, point: &AcPoint) -> FeasibilityReport {
    let n = net.num_buses();
    let mut inj = vec![Complex64::new(0.0, 0.0); n];
    let mut rep = FeasibilityReport::default();
    for br in &net.branches {
        let (sf, st) = br.flows(point.v[br.from], point.v[br.to]);
        inj[br.from] += sf;
        inj[br.to] += st;
        if let Some(rate) = br.rate {
            rep.thermal = rep.thermal.max(sf.norm() - rate).max(st.norm() - rate);
        }
        let d = point.v[br.from].arg() - point.v[br.to].arg();
        let d = (d + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        rep.angle = rep.angle.max(br.angle_min - d).max(d - br.angle_max);
    }
    let mut gen = vec![Complex64::new(0.0, 0.0); n];
    for (k, g) in net.generators.iter().enumerate() {
        gen[g.bus] += Complex64::new(point.pg[k], point.qg[k]);
        rep.gen_p = rep.gen_p.max(g.p_min - point.pg[k]).max(point.pg[k] - g.p_max);
        rep.gen_q = rep.gen_q.max(g.q_min - point.qg[k]).max(point.qg[k] - g.q_max);
    }
    for (i, b) in net.buses.iter().enumerate() {
        let vm2 = point.v[i].norm_sqr();
        let shunt = Complex64::new(b.g_shunt, -b.b_shunt) * vm2;
        let mis = gen[i] - Complex64::new(b.p_load, b.q_load) - shunt - inj[i];
        rep.p_mismatch.push(mis.re);
        rep.q_mismatch.push(mis.im);
        rep.balance = rep.balance.max(mis.re.abs()).max(mis.im.abs());
        let vm = vm2.sqrt();
        rep.voltage = rep.voltage.max(b.v_min - vm).max(vm - b.v_max);
    }
    rep
}
