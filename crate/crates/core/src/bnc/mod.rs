//! Root cutting-plane loop and spatial branch-and-cut.

pub mod heuristic;
mod local;
mod params;
mod report;
mod search;
mod separation;

pub use heuristic::{point_cost, primal_heuristic, recover_voltages, FEASIBILITY_TOL};
pub use local::local_opf;
pub use params::{AlgorithmParams, Method};
pub use report::{gap, Bounds, CutCounts, Incumbent, NodeLog, RoundLog, RunReport, Status, Timings, REPORT_SCHEMA};
pub use search::{
    branch, branch_decision, root_loop, select_node, solve, BranchDecision, BranchVar, NodeRecord, RootResult,
    CONVERGED_MISMATCH, ENLARGE_GAP,
};
pub use separation::{separate_cycles, CycleModel};
