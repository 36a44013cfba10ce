use serde::{Deserialize, Serialize};

use super::heuristic::point_cost;
use super::params::AlgorithmParams;
use crate::case::{AcPoint, PowerNetwork};

pub const REPORT_SCHEMA: &str = "acopf-run-report/1";

/// `100 (ub - lb) / ub` for positive `ub`, else the absolute gap `ub - lb`.
pub fn gap(ub: f64, lb: f64) -> f64 {
    if ub > 0.0 {
        100.0 * (ub - lb) / ub
    } else {
        ub - lb
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Budget,
    Infeasible,
    Error,
}

/// Bounds at one point of the run; infinite bounds are `None`, and so is
/// `gap` unless both are finite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lb: Option<f64>,
    pub ub: Option<f64>,
    pub gap: Option<f64>,
    /// Whether `gap` is in percent (positive upper bound) or absolute.
    pub relative: bool,
}

impl Bounds {
    pub fn new(lb: f64, ub: f64) -> Self {
        let ub = ub.is_finite().then_some(ub);
        let lb = lb.is_finite().then_some(lb);
        Self {
            lb,
            ub,
            gap: ub.zip(lb).map(|(u, l)| gap(u, l)),
            relative: ub.map_or(true, |u| u > 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub cycles: usize,
    pub tightened: usize,
    pub box_volume: f64,
    pub bounds: Bounds,
    pub new_cuts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeLog {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub lb: f64,
    /// Edge and variable (`"c"` or `"s"`) the node was split on, if it was.
    pub branched: Option<(usize, String)>,
    pub outcome: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CutCounts {
    pub mccormick: usize,
    pub sdp: usize,
    pub edge_cut_rows: usize,
    pub arctan_rows: usize,
}

/// Wall-clock seconds per phase. These are the only fields that differ
/// between identical runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub root: f64,
    pub tree: f64,
    pub total: f64,
}

/// Best feasible point found, in p.u. and radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub cost: f64,
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    pub pg: Vec<f64>,
    pub qg: Vec<f64>,
}

impl Incumbent {
    pub fn new(net: &PowerNetwork, x: &AcPoint) -> Self {
        Self {
            cost: point_cost(net, x),
            vm: x.v.iter().map(|v| v.norm()).collect(),
            va: x.v.iter().map(|v| v.arg()).collect(),
            pg: x.pg.clone(),
            qg: x.qg.clone(),
        }
    }

    pub fn point(&self) -> AcPoint {
        AcPoint {
            v: self.vm.iter().zip(&self.va).map(|(&m, &a)| num_complex::Complex64::from_polar(m, a)).collect(),
            pg: self.pg.clone(),
            qg: self.qg.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub instance: String,
    pub method: String,
    pub params: AlgorithmParams,
    pub status: Status,
    pub root: Bounds,
    pub final_bounds: Bounds,
    pub rounds: Vec<RoundLog>,
    pub cuts: CutCounts,
    pub nodes: Vec<NodeLog>,
    pub nodes_processed: usize,
    pub timings: Timings,
    pub incumbent: Option<Incumbent>,
    pub message: Option<String>,
}

impl RunReport {
    /// Fixed-width rows in the layout `instance  method  %gap  time (s)  nodes`.
    pub fn table(&self) -> String {
        let g = |b: &Bounds| b.gap.map_or("-".to_string(), |g| format!("{g:.2}"));
        let mut out = format!("{:<20} {:<10} {:>9} {:>9} {:>10} {:>7}\n", "instance", "method", "root %gap", "%gap", "time (s)", "nodes");
        out += &format!(
            "{:<20} {:<10} {:>9} {:>9} {:>10.2} {:>7}\n",
            self.instance,
            self.method,
            g(&self.root),
            g(&self.final_bounds),
            self.timings.total,
            self.nodes_processed
        );
        out
    }
}
