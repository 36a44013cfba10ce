//! SOCP relaxation in the lifted variables, variable boxes, edge cuts,
//! arctangent envelopes and small oracles for the rank-one structure.

mod arctan;
mod bounds;
mod edge_cuts;
mod hull;
pub mod minors;
mod socp;

pub use arctan::{arctan_envelope, restricted_region, AtPlane, ArctanEnvelope};
pub use bounds::{edge_box, EdgeBox, Interval, VariableBounds};
pub use edge_cuts::{edge_cut_coefficients, EdgeCutCoefficients, Plane};
pub use hull::{
    c_free_points, diag_free_points, hull_extreme_points, in_edge_hull, s_free_points, EdgeHullBox,
};
pub use socp::{
    build_socp, build_scoped, cost_scale, theta_mismatch, Objective, RelaxOptions, RelaxationModel,
    RelaxationSolution, Scope,
};

use serde::{Deserialize, Serialize};

/// A scalar of the lifted formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarRef {
    /// `c_ii` of a bus.
    Cii(usize),
    /// `c_ij` of an edge, oriented `from -> to`.
    C(usize),
    /// `s_ij` of an edge, oriented `from -> to`.
    S(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutOrigin {
    McCormick,
    Sdp,
}

/// `sum coeffs * x >= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCut {
    pub coeffs: Vec<(VarRef, f64)>,
    pub rhs: f64,
    pub origin: CutOrigin,
}

impl LinearCut {
    pub fn lhs(&self, p: &LiftedPoint) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * p.get(v)).sum()
    }

    /// `rhs - lhs`, positive when violated.
    pub fn violation(&self, p: &LiftedPoint) -> f64 {
        self.rhs - self.lhs(p)
    }

    pub fn inf_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, &(_, c)| a.max(c.abs()))
    }
}

/// Values of the lifted variables, indexed like the network.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub cii: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
}

impl LiftedPoint {
    pub fn get(&self, v: VarRef) -> f64 {
        match v {
            VarRef::Cii(i) => self.cii[i],
            VarRef::C(e) => self.c[e],
            VarRef::S(e) => self.s[e],
        }
    }

    pub fn from_ac(net: &crate::case::PowerNetwork, point: &crate::case::AcPoint) -> Self {
        let (cii, c, s) = point.lifted(net);
        let theta = point.v.iter().map(|v| v.arg()).collect();
        Self { cii, c, s, theta }
    }
}
