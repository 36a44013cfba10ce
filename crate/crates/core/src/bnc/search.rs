//! The root cutting-plane loop and the best-bound spatial branch-and-cut.

use std::time::Instant;

use acopf_conic::{SolveStatus, SolverConfig};
use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use super::heuristic::primal_heuristic;
use super::params::{AlgorithmParams, Method};
use super::report::{gap, Bounds, CutCounts, Incumbent, NodeLog, RoundLog, RunReport, Status, Timings, REPORT_SCHEMA};
use super::separation::{separate_cycles, CycleModel};
use crate::case::{AcPoint, PowerNetwork};
use crate::cycles::{cycle_basis, enlarge_cycles, Cycle};
use crate::relax::{
    build_socp, theta_mismatch, CutOrigin, Interval, LiftedPoint, RelaxOptions, RelaxationSolution, VariableBounds,
};
use crate::sep::CutPool;
use crate::tighten::{box_volume, neighborhood, run_round, TightenError};

/// Root gap in percent above which the cycle set is enlarged.
pub const ENLARGE_GAP: f64 = 1.0;

/// Largest angle mismatch for which a node counts as rank one.
pub const CONVERGED_MISMATCH: f64 = 1e-9;

/// Tolerance under which a stopped solve still gives a lower bound.
const USABLE_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchVar {
    C,
    S,
}

impl BranchVar {
    pub fn name(self) -> &'static str {
        match self {
            BranchVar::C => "c",
            BranchVar::S => "s",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDecision {
    pub edge: usize,
    pub var: BranchVar,
    pub split: f64,
}

/// A node of the tree: its boxes, the cuts inherited from its ancestors,
/// the solution of its parent and the split that created it.
#[derive(Clone, Debug)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub bounds: VariableBounds,
    pub parent_solution: Option<LiftedPoint>,
    pub line: Option<BranchDecision>,
    pub cuts: CutPool,
    pub lb: f64,
    /// The node's own relaxation solution once solved.
    pub solution: Option<LiftedPoint>,
}

/// Removes and returns the open node of least lower bound, ties to the
/// lowest id.
pub fn select_node(open: &mut Vec<NodeRecord>) -> Option<NodeRecord> {
    let k = (0..open.len()).min_by(|&a, &b| open[a].lb.total_cmp(&open[b].lb).then(open[a].id.cmp(&open[b].id)))?;
    Some(open.swap_remove(k))
}

/// Edge of largest angle mismatch and the one of its `c`, `s` whose value is
/// farther from its box boundary, split at the value clamped to the middle
/// 60% of the box. `None` when every mismatch is below
/// [`CONVERGED_MISMATCH`] or no edge has a splittable box.
pub fn branch_decision(net: &PowerNetwork, bounds: &VariableBounds, p: &LiftedPoint) -> Option<BranchDecision> {
    let mut order: Vec<(f64, usize)> = (0..net.edges.len())
        .map(|e| (theta_mismatch(net, p, e), e))
        .filter(|(m, _)| m.is_finite() && *m >= CONVERGED_MISMATCH)
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, e) in order {
        let b = &bounds.edges[e];
        let dist = |i: &Interval, v: f64| (v - i.lo).min(i.hi - v);
        let (dc, ds) = (dist(&b.c, p.c[e]), dist(&b.s, p.s[e]));
        let mut picks = if dc >= ds { [(BranchVar::C, b.c, p.c[e]), (BranchVar::S, b.s, p.s[e])] } else { [(BranchVar::S, b.s, p.s[e]), (BranchVar::C, b.c, p.c[e])] };
        // A degenerate box cannot be split; fall back to the other variable.
        picks.sort_by_key(|(_, i, _)| i.width() <= 1e-7);
        let (var, i, v) = picks[0];
        if i.width() <= 1e-7 {
            continue;
        }
        let split = v.clamp(i.lo + 0.2 * i.width(), i.lo + 0.8 * i.width());
        return Some(BranchDecision { edge: e, var, split });
    }
    None
}

/// The two children of `node` under `d`, with ids `next` and `next + 1`.
pub fn branch(node: &NodeRecord, d: BranchDecision, next: usize) -> (NodeRecord, NodeRecord) {
    let child = |id: usize, lower: bool| {
        let mut bounds = node.bounds.clone();
        let b = &mut bounds.edges[d.edge];
        let i = match d.var {
            BranchVar::C => &mut b.c,
            BranchVar::S => &mut b.s,
        };
        if lower {
            i.hi = d.split;
        } else {
            i.lo = d.split;
        }
        NodeRecord {
            id,
            parent: Some(node.id),
            depth: node.depth + 1,
            bounds,
            parent_solution: node.solution.clone(),
            line: Some(d),
            cuts: node.cuts.clone(),
            lb: node.lb,
            solution: None,
        }
    };
    (child(next, true), child(next + 1, false))
}

/// Everything the tree search starts from.
#[derive(Clone, Debug)]
pub struct RootResult {
    pub infeasible: bool,
    pub lb: f64,
    pub ub: f64,
    pub incumbent: Option<AcPoint>,
    pub bounds: VariableBounds,
    pub pool: CutPool,
    pub cycles: Vec<CycleModel>,
    pub solution: Option<RelaxationSolution>,
    pub rounds: Vec<RoundLog>,
    pub cuts: CutCounts,
    pub elapsed: f64,
}

struct Search<'a> {
    net: &'a PowerNetwork,
    params: &'a AlgorithmParams,
    cfg: SolverConfig,
    start: Instant,
    ub: f64,
    incumbent: Option<AcPoint>,
}

impl<'a> Search<'a> {
    fn new(net: &'a PowerNetwork, params: &'a AlgorithmParams, start: Instant) -> Self {
        Self { net, params, cfg: SolverConfig::default(), start, ub: params.ub.unwrap_or(f64::INFINITY), incumbent: None }
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn out_of_time(&self) -> bool {
        self.elapsed() >= self.params.time_limit
    }

    fn opts(&self) -> RelaxOptions {
        if self.params.method == Method::SocpOnly {
            RelaxOptions::PLAIN
        } else {
            RelaxOptions::STRENGTHENED
        }
    }

    fn closed(&self, lb: f64) -> bool {
        lb >= (1.0 - self.params.eps) * self.ub
    }

    fn try_heuristic(&mut self, sol: Option<&RelaxationSolution>) {
        if let Some((x, cost)) = primal_heuristic(self.net, sol) {
            if cost < self.ub {
                debug!("incumbent improved to {cost:.4}");
                self.ub = cost;
                self.incumbent = Some(x);
            } else if self.incumbent.is_none() {
                self.incumbent = Some(x);
            }
        }
    }

    fn solve_relaxation(&self, bounds: &VariableBounds, pool: &CutPool) -> (RelaxationSolution, usize, usize) {
        let rm = build_socp(self.net, bounds, &pool.linear_cuts(), self.opts());
        (rm.solve(&self.cfg), rm.edge_cut_rows, rm.arctan_rows)
    }

    fn tighten(&self, bounds: &mut VariableBounds, pool: &CutPool, lines: &[usize], radius: usize) -> Result<usize, TightenError> {
        let stats = run_round(self.net, bounds, &pool.linear_cuts(), lines, radius, self.opts(), &self.cfg)?;
        debug!("tightening (radius {radius}): {stats:?}");
        Ok(stats.committed + stats.dual_committed)
    }

    fn root(&mut self) -> RootResult {
        let net = self.net;
        let p = self.params;
        let mut bounds = VariableBounds::initial(net);
        let mut pool = CutPool::new();
        let mut res = RootResult {
            infeasible: false,
            lb: f64::NEG_INFINITY,
            ub: f64::INFINITY,
            incumbent: None,
            bounds: bounds.clone(),
            pool: CutPool::new(),
            cycles: Vec::new(),
            solution: None,
            rounds: Vec::new(),
            cuts: CutCounts::default(),
            elapsed: 0.0,
        };
        let plain = build_socp(net, &bounds, &[], RelaxOptions::PLAIN).solve(&self.cfg);
        match plain.status {
            SolveStatus::PrimalInfeasible => {
                res.infeasible = true;
                return res;
            }
            _ if plain.is_usable(USABLE_TOL) => res.lb = plain.objective,
            s => warn!("plain relaxation ended with {s:?}"),
        }
        self.try_heuristic(plain.is_usable(USABLE_TOL).then_some(&plain));
        let mut solution = Some(plain);
        if p.method != Method::SocpOnly {
            let mut cycles: Vec<Cycle> = cycle_basis(net);
            let all_lines: Vec<usize> = (0..net.edges.len()).collect();
            if let Err(e) = self.tighten(&mut bounds, &pool, &all_lines, p.r1) {
                info!("{e}");
                res.infeasible = true;
                return res;
            }
            let difficult = !self.closed(res.lb) && gap(self.ub, res.lb) > ENLARGE_GAP;
            let mut models: Vec<CycleModel> = cycles.iter().cloned().map(|c| CycleModel::new(net, c)).collect();
            let mut t = 0;
            while t < p.rounds && !self.closed(res.lb) && !self.out_of_time() {
                if t < p.cycle_rounds && net.num_buses() <= p.bmax && difficult {
                    let extra = enlarge_cycles(&cycles, net);
                    models.extend(extra.iter().cloned().map(|c| CycleModel::new(net, c)));
                    cycles.extend(extra);
                }
                let tightened = match self.tighten(&mut bounds, &pool, &all_lines, p.r2) {
                    Ok(n) => n,
                    Err(e) => {
                        info!("{e}");
                        res.infeasible = true;
                        return res;
                    }
                };
                let (sol, _, _) = self.solve_relaxation(&bounds, &pool);
                if sol.status == SolveStatus::PrimalInfeasible {
                    res.infeasible = true;
                    return res;
                }
                let mut new_cuts = 0;
                if sol.is_usable(USABLE_TOL) {
                    res.lb = res.lb.max(sol.objective);
                    self.try_heuristic(Some(&sol));
                    new_cuts = separate_cycles(net, &bounds, &models, |_| true, &sol.point, p.method, &mut pool, &self.cfg);
                } else {
                    warn!("root relaxation of round {t} ended with {:?}", sol.status);
                }
                let log = RoundLog {
                    round: t,
                    cycles: models.len(),
                    tightened,
                    box_volume: box_volume(&bounds),
                    bounds: Bounds::new(res.lb, self.ub),
                    new_cuts,
                };
                info!("root round {t}: lb {:.4} ub {:.4} cuts +{new_cuts}", res.lb, self.ub);
                res.rounds.push(log);
                solution = Some(sol);
                t += 1;
            }
            if !res.rounds.is_empty() {
                let (sol, ec, at) = self.solve_relaxation(&bounds, &pool);
                res.cuts.edge_cut_rows = ec;
                res.cuts.arctan_rows = at;
                if sol.is_usable(USABLE_TOL) {
                    res.lb = res.lb.max(sol.objective);
                    self.try_heuristic(Some(&sol));
                    solution = Some(sol);
                }
            }
            res.cycles = models;
        }
        res.cuts.mccormick = pool.count(CutOrigin::McCormick);
        res.cuts.sdp = pool.count(CutOrigin::Sdp);
        res.ub = self.ub;
        res.incumbent = self.incumbent.clone();
        res.bounds = bounds;
        res.pool = pool;
        res.solution = solution;
        res.elapsed = self.elapsed();
        res
    }

    /// Processes a non-root node: local tightening around the branched
    /// line, separation of the parent solution on the cycles through it, and
    /// the node relaxation. Returns `false` if the node is infeasible.
    fn process(&mut self, node: &mut NodeRecord, cycles: &[CycleModel]) -> bool {
        let net = self.net;
        let d = node.line.expect("non-root node without a branched line");
        if self.params.method != Method::SocpOnly {
            let lines = neighborhood(net, d.edge, self.params.r2).edges;
            if self.tighten(&mut node.bounds, &node.cuts, &lines, self.params.r2).is_err() {
                return false;
            }
            if let Some(ps) = &node.parent_solution {
                separate_cycles(
                    net,
                    &node.bounds,
                    cycles,
                    |m| m.cycle.contains_edge(d.edge),
                    ps,
                    self.params.method,
                    &mut node.cuts,
                    &self.cfg,
                );
            }
        }
        let (sol, _, _) = self.solve_relaxation(&node.bounds, &node.cuts);
        match sol.status {
            SolveStatus::PrimalInfeasible => return false,
            _ if sol.is_usable(USABLE_TOL) => {
                node.lb = node.lb.max(sol.objective);
                self.try_heuristic(Some(&sol));
                node.solution = Some(sol.point);
            }
            s => {
                warn!("relaxation of node {} ended with {s:?}; keeping the parent bound", node.id);
                node.solution = node.parent_solution.clone();
            }
        }
        true
    }
}

/// The root loop alone.
pub fn root_loop(net: &PowerNetwork, params: &AlgorithmParams) -> RootResult {
    Search::new(net, params, Instant::now()).root()
}

/// Root loop followed, unless `params.root_only`, by the spatial
/// branch-and-cut, under a total wall-clock budget checked between rounds
/// and between nodes.
pub fn solve(net: &PowerNetwork, params: &AlgorithmParams) -> RunReport {
    let run = || solve_inner(net, params);
    match params.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                warn!("could not build a pool of {n} threads: {e}");
                run()
            }
        },
        None => run(),
    }
}

fn solve_inner(net: &PowerNetwork, params: &AlgorithmParams) -> RunReport {
    let start = Instant::now();
    let mut s = Search::new(net, params, start);
    let root = s.root();
    let mut report = RunReport {
        schema: REPORT_SCHEMA.to_string(),
        instance: net.name.clone(),
        method: params.method.name().to_string(),
        params: params.clone(),
        status: Status::Budget,
        root: Bounds::new(root.lb, root.ub),
        final_bounds: Bounds::new(root.lb, root.ub),
        rounds: root.rounds.clone(),
        cuts: root.cuts.clone(),
        nodes: Vec::new(),
        nodes_processed: 0,
        timings: Timings { root: root.elapsed, ..Default::default() },
        incumbent: None,
        message: None,
    };
    if root.infeasible {
        report.status = Status::Infeasible;
        report.timings.total = s.elapsed();
        return report;
    }
    if s.closed(root.lb) {
        report.status = Status::Optimal;
    } else if !params.root_only && !s.out_of_time() {
        let tree_start = Instant::now();
        tree(&mut s, root, &mut report);
        report.timings.tree = tree_start.elapsed().as_secs_f64();
    }
    report.incumbent = s.incumbent.as_ref().map(|x| Incumbent::new(net, x));
    report.timings.total = s.elapsed();
    report
}

fn tree(s: &mut Search, root: RootResult, report: &mut RunReport) {
    let net = s.net;
    let mut open = vec![NodeRecord {
        id: 0,
        parent: None,
        depth: 0,
        bounds: root.bounds,
        parent_solution: None,
        line: None,
        cuts: root.pool,
        lb: root.lb,
        solution: root.solution.map(|x| x.point),
    }];
    let mut next_id = 1;
    // Least bound over nodes closed without being split further.
    let mut closed_lb = f64::INFINITY;
    let mut status = Status::Budget;
    let mut lb = root.lb;
    loop {
        let open_lb = open.iter().map(|n| n.lb).fold(f64::INFINITY, f64::min);
        lb = lb.max(open_lb.min(closed_lb));
        if open.is_empty() {
            status = if s.ub.is_finite() { Status::Optimal } else { Status::Infeasible };
            break;
        }
        if s.closed(open_lb) {
            status = Status::Optimal;
            lb = lb.max(open_lb.min(closed_lb));
            break;
        }
        if s.out_of_time() || s.params.max_nodes.is_some_and(|m| report.nodes_processed >= m) {
            break;
        }
        let mut node = select_node(&mut open).expect("open list is nonempty");
        report.nodes_processed += 1;
        let mut log = NodeLog { id: node.id, parent: node.parent, depth: node.depth, lb: node.lb, branched: None, outcome: String::new() };
        if node.id != 0 && !s.process(&mut node, &root.cycles) {
            log.outcome = "infeasible".into();
            report.nodes.push(log);
            continue;
        }
        log.lb = node.lb;
        if s.closed(node.lb) {
            closed_lb = closed_lb.min(node.lb);
            log.outcome = "pruned".into();
            report.nodes.push(log);
            continue;
        }
        let decision = node.solution.as_ref().and_then(|p| branch_decision(net, &node.bounds, p));
        match decision {
            None => {
                closed_lb = closed_lb.min(node.lb);
                log.outcome = "converged".into();
            }
            Some(d) => {
                let (a, b) = branch(&node, d, next_id);
                next_id += 2;
                log.branched = Some((d.edge, d.var.name().to_string()));
                log.outcome = "branched".into();
                open.push(a);
                open.push(b);
            }
        }
        debug!("node {} lb {:.4} ub {:.4} open {}", node.id, node.lb, s.ub, open.len());
        report.nodes.push(log);
    }
    let lb = lb.min(s.ub);
    report.status = status;
    report.final_bounds = Bounds::new(lb, s.ub);
    report.incumbent = s.incumbent.as_ref().map(|x| Incumbent::new(net, x));
    info!("tree finished: {status:?} after {} nodes, lb {lb:.4} ub {:.4}", report.nodes_processed, s.ub);
}
