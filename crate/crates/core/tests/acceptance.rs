//! Acceptance suite: one test per criterion, named `criterion_NN_*`. Each
//! prints a one-line summary of what it measured (`--nocapture` to see it).
//! The tests share a lock so the timed ones are not slowed by the others.

mod common;

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use acopf_conic::{LinExpr, Model, Sense, SolveStatus, SolverConfig};
use acopf_core::bnc::*;
use acopf_core::case::{evaluate_ac_feasibility, AcPoint, PowerNetwork};
use acopf_core::cycles::*;
use acopf_core::relax::minors::{max_minor_modulus, outer};
use acopf_core::relax::*;
use acopf_core::sep::CutPool;
use acopf_core::tighten::{box_volume, run_round, MIN_IMPROVEMENT};
use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

const CASES: [&str; 5] = ["nesta_case3_lmbd", "case4_gs", "nesta_case5_pjm", "nesta_case9_wscc", "case14_ieee"];

const SEP_METHODS: [Method; 3] = [Method::SepM, Method::SepS, Method::SepMs];

fn root_run(name: &str, method: Method) -> (RunReport, f64) {
    let net = load(name);
    let params = AlgorithmParams { root_only: true, ..AlgorithmParams::with_method(method) };
    let t = Instant::now();
    let r = solve(&net, &params);
    (r, t.elapsed().as_secs_f64())
}

fn root_gap(r: &RunReport) -> f64 {
    r.root.gap.expect("root gap")
}

#[test]
fn criterion_01_plain_relaxation_gap_on_five_bus() {
    let _g = serial();
    let (r, secs) = root_run("nesta_case5_pjm", Method::SocpOnly);
    let ub = r.root.ub.unwrap();
    let g = root_gap(&r);
    println!("criterion 01: 5pjm SOCP root gap {g:.3}% (ub {ub:.2}), {secs:.2} s");
    assert!((ub - 17551.89).abs() <= 1e-3 * 17551.89, "heuristic ub {ub}");
    assert!((g - 14.54).abs() <= 0.5, "gap {g}");
    assert!(secs < 5.0, "{secs} s");
}

#[test]
fn criterion_02_small_cases_close_at_the_root() {
    let _g = serial();
    for name in ["nesta_case9_wscc", "case4_gs"] {
        for m in SEP_METHODS {
            let (r, secs) = root_run(name, m);
            let g = root_gap(&r);
            println!("criterion 02: {name} {} root gap {g:.4}%, {secs:.2} s", m.name());
            assert!(g <= 0.1, "{name} {m:?}: gap {g}");
            assert!(secs < 10.0, "{name} {m:?}: {secs} s");
        }
    }
}

#[test]
fn criterion_03_separation_root_gaps_on_five_bus() {
    let _g = serial();
    for (m, limit) in [(Method::SepMs, 4.0), (Method::SepS, 5.0)] {
        let (r, secs) = root_run("nesta_case5_pjm", m);
        let g = root_gap(&r);
        println!("criterion 03: 5pjm {} root gap {g:.3}%, {secs:.2} s", m.name());
        assert!(g <= limit, "{m:?}: gap {g}");
        assert!(secs < 30.0, "{m:?}: {secs} s");
    }
}

#[test]
fn criterion_04_branch_and_cut_on_five_bus() {
    let _g = serial();
    let net = load("nesta_case5_pjm");
    let params = AlgorithmParams { time_limit: 900.0, ..AlgorithmParams::with_method(Method::SepS) };
    let r = solve(&net, &params);
    let g = r.final_bounds.gap.expect("final gap");
    println!(
        "criterion 04: 5pjm SEP(S) branch-and-cut gap {g:.3}%, {} nodes, {:.1} s, {:?}",
        r.nodes_processed, r.timings.total, r.status
    );
    assert!(g <= 0.3, "gap {g}");
    assert!((20..=2000).contains(&r.nodes_processed), "{} nodes", r.nodes_processed);
    assert!(r.timings.total <= 900.0 + 60.0);
}

#[test]
fn criterion_05_three_bus_root_gaps() {
    let _g = serial();
    let (r, _) = root_run("nesta_case3_lmbd", Method::SocpOnly);
    let g = root_gap(&r);
    println!("criterion 05: 3lmbd SOCP root gap {g:.3}%");
    assert!((g - 1.32).abs() <= 0.3, "gap {g}");
    for m in SEP_METHODS {
        let (r, _) = root_run("nesta_case3_lmbd", m);
        let g = root_gap(&r);
        println!("criterion 05: 3lmbd {} root gap {g:.3}%", m.name());
        assert!(g <= 0.3, "{m:?}: gap {g}");
    }
}

#[test]
fn criterion_06_minor_oracle() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut vec = |n: usize| -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    };
    let (mut worst_one, mut weakest_two) = (0.0f64, f64::INFINITY);
    for k in 0..1000 {
        let n = 1 + k % 8;
        worst_one = worst_one.max(max_minor_modulus(&outer(&vec(n))));
    }
    for k in 0..1000 {
        let n = 2 + k % 7;
        let rank = 2 + k % (n - 1);
        let mut x: DMatrix<Complex64> = DMatrix::zeros(n, n);
        for _ in 0..rank {
            x += outer(&vec(n));
        }
        weakest_two = weakest_two.min(max_minor_modulus(&x));
    }
    println!("criterion 06: rank-one worst minor {worst_one:.2e}, rank >= 2 weakest minor {weakest_two:.2e}");
    assert!(worst_one <= 1e-10);
    assert!(weakest_two >= 1e-3);
}

/// AC-feasible points from local solves with random generator costs and
/// random starts.
fn feasible_samples(net: &PowerNetwork, attempts: usize, seed: u64) -> Vec<AcPoint> {
    (0..attempts)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 1_000_003 + k as u64);
            let mut n = net.clone();
            for g in &mut n.generators {
                g.cost = [0.0, rng.gen_range(-3000.0..3000.0), rng.gen_range(0.0..3000.0)];
            }
            let start = AcPoint {
                v: random_voltages(net, &mut rng, 0.3),
                pg: net.generators.iter().map(|g| rng.gen_range(g.p_min..=g.p_max)).collect(),
                qg: net.generators.iter().map(|g| rng.gen_range(g.q_min..=g.q_max)).collect(),
            };
            let x = local_opf(&n, &start)?;
            evaluate_ac_feasibility(net, &x).is_feasible(1e-8).then_some(x)
        })
        .collect()
}

/// Boxes and cuts produced while solving, and whether every AC-feasible
/// point is required to lie in the boxes (true for the root).
struct CutContext {
    label: String,
    bounds: VariableBounds,
    cuts: Vec<LinearCut>,
    global: bool,
}

fn contexts(net: &PowerNetwork, cfg: &SolverConfig) -> Vec<CutContext> {
    let mut out = vec![CutContext {
        label: "initial".into(),
        bounds: VariableBounds::initial(net),
        cuts: vec![],
        global: true,
    }];
    for m in SEP_METHODS {
        let root = root_loop(net, &AlgorithmParams::with_method(m));
        out.push(CutContext {
            label: format!("root {}", m.name()),
            bounds: root.bounds.clone(),
            cuts: root.pool.linear_cuts(),
            global: true,
        });
        let Some(sol) = &root.solution else { continue };
        let Some(d) = branch_decision(net, &root.bounds, &sol.point) else { continue };
        let parent = NodeRecord {
            id: 0,
            parent: None,
            depth: 0,
            bounds: root.bounds.clone(),
            parent_solution: None,
            line: None,
            cuts: root.pool.clone(),
            lb: root.lb,
            solution: Some(sol.point.clone()),
        };
        let (a, b) = branch(&parent, d, 1);
        for child in [a, b] {
            let mut pool = CutPool::new();
            separate_cycles(net, &child.bounds, &root.cycles, |_| true, &sol.point, m, &mut pool, cfg);
            let mut cuts = root.pool.linear_cuts();
            cuts.extend(pool.linear_cuts());
            let cs = build_socp(net, &child.bounds, &cuts, RelaxOptions::STRENGTHENED).solve(cfg);
            if cs.is_usable(1e-7) {
                separate_cycles(net, &child.bounds, &root.cycles, |_| true, &cs.point, m, &mut pool, cfg);
            }
            out.push(CutContext {
                label: format!("child {} of {}", child.id, m.name()),
                bounds: child.bounds,
                cuts: pool.linear_cuts(),
                global: false,
            });
        }
    }
    out
}

/// Violations above `tol` of the boxes (global contexts only), edge cuts,
/// arctangent envelopes and separated cuts at `p`; `None` when `p` is outside
/// a local context's boxes.
fn violations(net: &PowerNetwork, ctx: &CutContext, p: &LiftedPoint, tol: f64) -> Option<Vec<String>> {
    let inside = ctx.bounds.contains(p, tol);
    if !inside && !ctx.global {
        return None;
    }
    let mut out = Vec::new();
    if !inside {
        out.push(format!("{}: point outside the boxes", ctx.label));
    }
    for (e, ed) in net.edges.iter().enumerate() {
        let b = &ctx.bounds.edges[e];
        let (x, y) = (p.cii[ed.from], p.cii[ed.to]);
        for r in edge_cut_coefficients(ctx.bounds.bus[ed.from], ctx.bounds.bus[ed.to], b.c, b.s).rows() {
            let lhs = r[0] * x + r[1] * y + r[2] * p.c[e] + r[3] * p.s[e];
            if lhs < r[4] - tol {
                out.push(format!("{}: edge cut of edge {e} violated by {}", ctx.label, r[4] - lhs));
            }
        }
        if b.c.lo > 0.0 {
            if let Some(env) = arctan_envelope(b.c, b.s, b.theta) {
                let t = wrap(p.theta[ed.to] - p.theta[ed.from]);
                if !env.admits(p.c[e], p.s[e], t, tol) {
                    out.push(format!("{}: envelope of edge {e} violated", ctx.label));
                }
            }
        }
    }
    for cut in &ctx.cuts {
        let v = cut.violation(p);
        if v > tol {
            out.push(format!("{}: {:?} cut violated by {v:.2e}", ctx.label, cut.origin));
        }
    }
    Some(out)
}

#[test]
fn criterion_07_cut_validity_on_feasible_points() {
    let _g = serial();
    let cfg = SolverConfig::default();
    let (mut total, mut checks, mut cuts) = (0, 0usize, 0usize);
    let mut failures = Vec::new();
    for (k, name) in CASES.iter().enumerate() {
        let net = load(name);
        let samples = feasible_samples(&net, 2600, k as u64 + 1);
        total += samples.len();
        let ctxs = contexts(&net, &cfg);
        cuts += ctxs.iter().map(|c| c.cuts.len()).sum::<usize>();
        for x in &samples {
            let p = LiftedPoint::from_ac(&net, x);
            for ctx in &ctxs {
                if let Some(v) = violations(&net, ctx, &p, 1e-7) {
                    checks += 1;
                    failures.extend(v.into_iter().map(|s| format!("{name}: {s}")));
                }
            }
        }
    }
    println!(
        "criterion 07: {total} feasible points, {cuts} separated cuts, {checks} point-context checks, {} violations",
        failures.len()
    );
    assert!(total >= 10_000, "only {total} feasible samples");
    assert!(failures.is_empty(), "{}", failures.iter().take(10).cloned().collect::<Vec<_>>().join("\n"));
}

/// Largest `sign * (atan(s/c) - plane)` for each of the four unshifted
/// envelope planes over an `n x n` grid of the restricted region, plus `n`
/// points on each polygon edge.
fn envelope_grid_maxima(c: Interval, s: Interval, theta: Interval, env: &ArctanEnvelope, n: usize) -> [f64; 4] {
    let planes: Vec<(f64, f64, f64, f64)> = env
        .upper
        .iter()
        .map(|p| (1.0, p.gamma - p.shift, p.alpha, p.beta))
        .chain(env.lower.iter().map(|p| (-1.0, p.gamma + p.shift, p.alpha, p.beta)))
        .collect();
    let mut best = [f64::NEG_INFINITY; 4];
    let mut visit = |cv: f64, sv: f64| {
        let a = (sv / cv).atan();
        for (k, &(sign, g, al, be)) in planes.iter().enumerate() {
            best[k] = best[k].max(sign * (a - (g + al * cv + be * sv)));
        }
    };
    let (tlo, thi) = (theta.lo.tan(), theta.hi.tan());
    for i in 0..n {
        let cv = c.lo + c.width() * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let sv = s.lo + s.width() * j as f64 / (n - 1) as f64;
            if sv >= cv * tlo && sv <= cv * thi {
                visit(cv, sv);
            }
        }
    }
    let poly = restricted_region(c, s, theta);
    for k in 0..poly.len() {
        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            visit(p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1));
        }
    }
    best
}

#[test]
fn criterion_08_envelope_and_edge_cut_oracles() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut boxes = Vec::new();
    while boxes.len() < 100 {
        let c = random_interval(&mut rng, 0.3, 1.21, 0.01);
        let s = random_interval(&mut rng, -0.6, 0.6, 0.01);
        let theta = random_interval(&mut rng, -1.2, 1.2, 0.02);
        if let Some(env) = arctan_envelope(c, s, theta) {
            boxes.push((c, s, theta, env));
        }
    }
    let worst_shift = boxes
        .par_iter()
        .map(|(c, s, theta, env)| {
            let grid = envelope_grid_maxima(*c, *s, *theta, env, 2000);
            let shifts = env.upper.iter().chain(&env.lower).map(|p| p.shift);
            grid.iter().zip(shifts).map(|(g, d)| (g - d).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let ec_boxes: Vec<[Interval; 4]> = (0..20)
        .map(|_| {
            [
                random_interval(&mut rng, 0.81, 1.21, 0.0),
                random_interval(&mut rng, 0.81, 1.21, 0.0),
                random_interval(&mut rng, -0.2, 1.21, 0.0),
                random_interval(&mut rng, -0.6, 0.6, 0.0),
            ]
        })
        .collect();
    let (under, over) = ec_boxes
        .par_iter()
        .map(|b| edge_cut_grid_excess(b[0], b[1], b[2], b[3], 1000))
        .reduce(|| (f64::NEG_INFINITY, f64::NEG_INFINITY), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    println!(
        "criterion 08: envelope shift vs 2000x2000 grid max differ by <= {worst_shift:.2e}; \
         edge cut excess under {under:.2e}, over {over:.2e} on 10^6-point grids"
    );
    assert!(worst_shift <= 1e-6);
    assert!(under <= 1e-12 && over <= 1e-12);
}

#[test]
fn criterion_09_containment_chain_and_hull_statistics() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let cfg = SolverConfig::default();
    let mut worst = f64::NEG_INFINITY;
    for n in [3, 4, 5] {
        let net = ring(n, 30.0);
        let bounds = VariableBounds::initial(&net);
        let tri = triangulate(&net, &cycle_basis(&net)[0]);
        let chords = artificial_edge_bounds(&net, &bounds, &tri);
        let vb = |v| cycle_var_box(&bounds, &chords, v);
        let eqs = minor_equations(&net, &tri);
        let m = build_mccormick(&eqs, vb);
        let d = build_discretized(&eqs, vb, &designated_variables(&tri));
        let samples: Vec<LiftedPoint> = (0..500).map(|_| rank_one_in(&net, &bounds, &mut rng).1).collect();
        for _ in 0..100 {
            let obj: Vec<(VarRef, f64)> = m.x.iter().map(|&r| (r, rng.gen_range(-1.0..1.0))).collect();
            let inner =
                samples.iter().map(|p| obj.iter().map(|&(r, a)| a * p.get(r)).sum::<f64>()).fold(f64::MIN, f64::max);
            let (vd, _) = d.maximize(&obj, &cfg).expect("discretized optimum");
            let (vm, _) = m.maximize(&obj, &cfg).expect("McCormick optimum");
            worst = worst.max(inner - vd).max(vd - vm);
        }
    }
    // Hull tightness of the single-product-sum sets: among random box points
    // accepted by the McCormick set, the share that the discretized set also
    // accepts, against the share that truly lies in the hull.
    let (mut in_m, mut in_d, mut in_hull, mut chain_breaks) = (0, 0, 0, 0);
    for _ in 0..30 {
        let n = rng.gen_range(1..=3);
        let iv = |rng: &mut ChaCha8Rng| {
            let a: f64 = rng.gen_range(-1.0..1.0);
            Interval::new(a, a + rng.gen_range(0.2..1.5))
        };
        let inst = SaInstance {
            a: (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * rng.gen_range(0.5..2.0)).collect(),
            x: (0..n).map(|_| iv(&mut rng)).collect(),
            y: (0..n).map(|_| iv(&mut rng)).collect(),
        };
        let m = inst.mccormick();
        let designated: Vec<CycleVar> = (0..n).map(|k| CycleVar::Orig(SaInstance::x_var(k))).collect();
        let d = build_discretized(
            &[inst.equation()],
            |v| match v {
                CycleVar::Orig(VarRef::C(k)) => inst.x[k],
                CycleVar::Orig(VarRef::S(k)) => inst.y[k],
                _ => unreachable!(),
            },
            &designated,
        );
        for _ in 0..40 {
            let x: Vec<f64> = inst.x.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect();
            let y: Vec<f64> = inst.y.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect();
            let xy: Vec<f64> = x.iter().chain(&y).copied().collect();
            let (hm, hd, hh) = (m.contains(&xy, 1e-7, &cfg), d.contains(&xy, 1e-7, &cfg), sa_hull_oracle(&inst, &x, &y, 1e-7));
            if (hh && !hd) || (hd && !hm) {
                chain_breaks += 1;
            }
            in_m += hm as usize;
            in_d += hd as usize;
            in_hull += hh as usize;
        }
    }
    println!(
        "criterion 09: ordered optima slack {worst:.2e}; of box points, {in_m} in M, {in_d} in M^D, {in_hull} in the hull, \
         {chain_breaks} chain breaks"
    );
    assert!(worst <= 1e-7, "optima out of order by {worst}");
    assert_eq!(chain_breaks, 0);
    assert!(in_hull <= in_d && in_d <= in_m);
}

fn assert_changes_respect_threshold(before: &VariableBounds, after: &VariableBounds, label: &str) {
    for (e, (a, b)) in before.edges.iter().zip(&after.edges).enumerate() {
        for (x, y) in [(a.c, b.c), (a.s, b.s)] {
            assert!(y.lo >= x.lo && y.hi <= x.hi, "{label}: edge {e} loosened");
            for d in [y.lo - x.lo, x.hi - y.hi] {
                assert!(d == 0.0 || d >= MIN_IMPROVEMENT - 1e-15, "{label}: edge {e} moved by {d}");
            }
        }
    }
}

#[test]
fn criterion_10_tightening_safety_and_monotonicity() {
    let _g = serial();
    let cfg = SolverConfig::default();
    let (mut rounds, mut committed) = (0, 0);
    for (k, name) in CASES.iter().enumerate() {
        let net = load(name);
        let mut points: Vec<LiftedPoint> =
            feasible_samples(&net, 200, 100 + k as u64).iter().map(|x| LiftedPoint::from_ac(&net, x)).collect();
        let (x, _) = primal_heuristic(&net, None).expect("incumbent");
        points.push(LiftedPoint::from_ac(&net, &x));
        for m in SEP_METHODS {
            let root = root_loop(&net, &AlgorithmParams::with_method(m));
            for w in root.rounds.windows(2) {
                assert!(w[1].box_volume <= w[0].box_volume + 1e-12, "{name} {m:?}: volume grew");
            }
            assert!(points.iter().all(|p| root.bounds.contains(p, 1e-7)), "{name} {m:?}: point excluded");
            let lines: Vec<usize> = (0..net.edges.len()).collect();
            let cuts = root.pool.linear_cuts();
            let mut bounds = VariableBounds::initial(&net);
            for radius in [2, 4, 4] {
                let before = bounds.clone();
                let stats = run_round(&net, &mut bounds, &cuts, &lines, radius, RelaxOptions::STRENGTHENED, &cfg)
                    .expect("feasible round");
                rounds += 1;
                committed += stats.committed + stats.dual_committed;
                let label = format!("{name} {m:?} radius {radius}");
                assert!(box_volume(&bounds) <= box_volume(&before) + 1e-12, "{label}: volume grew");
                assert_changes_respect_threshold(&before, &bounds, &label);
                assert!(points.iter().all(|p| bounds.contains(p, 1e-7)), "{label}: point excluded");
            }
        }
    }
    println!("criterion 10: {rounds} instrumented rounds, {committed} commits, no exclusions or loosening");
}

/// The optimum of a solved model, after checking status, residuals and time.
fn solve_checked(m: &Model, label: &str) -> f64 {
    let t = Instant::now();
    let s = m.solve(&SolverConfig::default()).unwrap_or_else(|e| panic!("{label}: {e}"));
    let secs = t.elapsed().as_secs_f64();
    assert_eq!(s.status, SolveStatus::Optimal, "{label}");
    let r = s.residuals;
    assert!(r.primal <= 1e-8 && r.dual <= 1e-8 && r.gap <= 1e-8, "{label}: {r:?}");
    assert!(secs < 0.5, "{label}: {secs} s");
    s.objective
}

#[test]
fn criterion_11_conic_core_battery() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut problems: Vec<(String, Model, f64)> = Vec::new();
    for k in 0..10 {
        let n = rng.gen_range(3..=10);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut m = Model::new();
        let x: Vec<_> = (0..n).map(|_| m.add_nonneg_var()).collect();
        m.add_row(x.iter().fold(LinExpr::new(), |e, &v| e.plus(v, 1.0)), Sense::Eq, 1.0);
        m.minimize(x.iter().zip(&c).fold(LinExpr::new(), |e, (&v, &a)| e.plus(v, a)));
        problems.push((format!("simplex LP {k}"), m, c.iter().copied().fold(f64::INFINITY, f64::min)));
    }
    for k in 0..10 {
        let n = rng.gen_range(2..=12);
        let mut m = Model::new();
        let (mut obj, mut opt) = (LinExpr::new(), 0.0);
        for _ in 0..n {
            let (lo, w, c) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.1..4.0), rng.gen_range(-2.0..2.0));
            let v = m.add_var();
            m.add_bounds(v, lo, lo + w);
            obj.add(v, c);
            opt += if c >= 0.0 { c * lo } else { c * (lo + w) };
        }
        m.minimize(obj);
        problems.push((format!("box LP {k}"), m, opt));
    }
    for k in 0..10 {
        // Distance from `a` to the hyperplane `sum x = b`.
        let n = rng.gen_range(2..=10);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = rng.gen_range(-3.0..3.0);
        let mut m = Model::new();
        let t = m.add_var();
        let x: Vec<_> = (0..n).map(|_| m.add_var()).collect();
        m.add_row(x.iter().fold(LinExpr::new(), |e, &v| e.plus(v, 1.0)), Sense::Eq, b);
        let mut cone = vec![LinExpr::term(t, 1.0)];
        cone.extend(x.iter().zip(&a).map(|(&v, &ai)| LinExpr::term(v, 1.0).plus_const(-ai)));
        m.add_soc(cone);
        m.minimize(t.into());
        let opt = (a.iter().sum::<f64>() - b).abs() / (n as f64).sqrt();
        problems.push((format!("projection {k}"), m, opt));
    }
    for k in 0..10 {
        let n = rng.gen_range(2..=10);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let r = rng.gen_range(0.5..3.0);
        let mut m = Model::new();
        let x: Vec<_> = (0..n).map(|_| m.add_var()).collect();
        let mut cone = vec![LinExpr::constant(r)];
        cone.extend(x.iter().map(|&v| LinExpr::term(v, 1.0)));
        m.add_soc(cone);
        m.minimize(x.iter().zip(&c).fold(LinExpr::new(), |e, (&v, &a)| e.plus(v, a)));
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        problems.push((format!("ball LP {k}"), m, -r * norm));
    }
    for k in 0..5 {
        // Smallest eigenvalue: max t subject to A - t I PSD.
        let n = rng.gen_range(2..=5);
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &g + g.transpose();
        let lmin = a.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        let mut m = Model::new();
        let t = m.add_var();
        let mut upper = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                let e = LinExpr::constant(a[(i, j)]);
                upper.push(if i == j { e.plus(t, -1.0) } else { e });
            }
        }
        m.add_psd(n, upper);
        m.maximize(t.into());
        problems.push((format!("eigenvalue SDP {k}"), m, lmin));
    }
    for k in 0..5 {
        // Completion of [[x, a], [a, y]] of least trace.
        let a = rng.gen_range(-3.0..3.0);
        let mut m = Model::new();
        let (x, y) = (m.add_var(), m.add_var());
        m.add_psd(2, vec![x.into(), LinExpr::constant(a), y.into()]);
        m.minimize(LinExpr::term(x, 1.0).plus(y, 1.0));
        problems.push((format!("PSD completion {k}"), m, 2.0 * a.abs()));
    }
    assert_eq!(problems.len(), 50);
    let mut worst = 0.0f64;
    for (label, m, opt) in &problems {
        let v = solve_checked(m, label);
        let err = (v - opt).abs() / opt.abs().max(1.0);
        assert!(err <= 1e-7, "{label}: {v} vs {opt}");
        worst = worst.max(err);
    }
    println!("criterion 11: 50 problems at 1e-8 residuals, worst relative error {worst:.2e}");
}
