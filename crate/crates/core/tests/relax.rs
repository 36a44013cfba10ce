mod common;

use acopf_conic::SolverConfig;
use acopf_core::relax::minors::{edge_rank_residual, max_minor_modulus, outer};
use acopf_core::relax::*;
use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn socp_value(name: &str, opts: RelaxOptions) -> f64 {
    let net = load(name);
    let sol = build_socp(&net, &VariableBounds::initial(&net), &[], opts).solve(&SolverConfig::default());
    assert!(sol.is_usable(1e-7), "{name}: {:?}", sol.status);
    sol.objective
}

#[test]
fn plain_relaxation_gaps() {
    let gap = |ub: f64, lb: f64| 100.0 * (ub - lb) / ub;
    let g5 = gap(17551.89, socp_value("nesta_case5_pjm", RelaxOptions::PLAIN));
    assert!((g5 - 14.54).abs() <= 0.5, "{g5}");
    let g3 = gap(5812.64, socp_value("nesta_case3_lmbd", RelaxOptions::PLAIN));
    assert!((g3 - 1.32).abs() <= 0.3, "{g3}");
    let g9 = gap(5296.69, socp_value("nesta_case9_wscc", RelaxOptions::PLAIN));
    assert!(g9.abs() <= 0.01, "{g9}");
}

#[test]
fn edge_cuts_and_envelopes_never_weaken_the_relaxation() {
    for name in ["nesta_case3_lmbd", "nesta_case5_pjm", "case14_ieee"] {
        let plain = socp_value(name, RelaxOptions::PLAIN);
        let strong = socp_value(name, RelaxOptions::STRENGTHENED);
        assert!(strong >= plain - 1e-6 * plain.abs(), "{name}: {strong} < {plain}");
    }
}

#[test]
fn edge_cut_estimators_on_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..30 {
        let cii = random_interval(&mut rng, 0.81, 1.21, 0.0);
        let cjj = random_interval(&mut rng, 0.81, 1.21, 0.0);
        let c = random_interval(&mut rng, 0.3, 1.21, 0.0);
        let s = random_interval(&mut rng, -0.6, 0.6, 0.0);
        let (under, over) = edge_cut_grid_excess(cii, cjj, c, s, 300);
        assert!(under <= 1e-12, "underestimator exceeds sqrt(x y) by {under}");
        assert!(over <= 1e-12, "overestimator falls below the norm by {over}");
    }
}

#[test]
fn edge_cuts_hold_on_rank_one_points_and_hull_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut found = 0;
    for _ in 0..30 {
        let b = EdgeHullBox {
            cii: random_interval(&mut rng, 0.81, 1.21, 0.02),
            cjj: random_interval(&mut rng, 0.81, 1.21, 0.02),
            c: random_interval(&mut rng, 0.5, 1.21, 0.05),
            s: random_interval(&mut rng, -0.6, 0.6, 0.05),
        };
        let rows = edge_cut_coefficients(b.cii, b.cjj, b.c, b.s).rows();
        let holds = |p: [f64; 4]| rows.iter().all(|r| r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + r[3] * p[3] >= r[4] - 1e-9);
        for p in hull_extreme_points(&b) {
            assert!(holds(p), "edge cut cuts off hull vertex {p:?}");
        }
        for _ in 0..2000 {
            let (x, y) = (rng.gen_range(b.cii.lo..=b.cii.hi), rng.gen_range(b.cjj.lo..=b.cjj.hi));
            let c = rng.gen_range(b.c.lo..=b.c.hi);
            let r2 = x * y - c * c;
            if r2 < 0.0 {
                continue;
            }
            let s = if rng.gen_bool(0.5) { r2.sqrt() } else { -r2.sqrt() };
            if !b.s.contains(s, 0.0) {
                continue;
            }
            let p = [x, y, c, s];
            assert!(edge_rank_residual(x, y, c, s).abs() < 1e-12);
            assert!(in_edge_hull(&b, p, 1e-7));
            assert!(holds(p), "edge cut cuts off rank-one point {p:?}");
            found += 1;
        }
    }
    assert!(found > 1000, "only {found} rank-one samples");
}

#[test]
fn envelope_shifts_match_grid_maxima() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut checked = 0;
    while checked < 20 {
        let c = random_interval(&mut rng, 0.3, 1.21, 0.01);
        let s = random_interval(&mut rng, -0.6, 0.6, 0.01);
        let theta = random_interval(&mut rng, -1.0, 1.0, 0.05);
        let Some(env) = arctan_envelope(c, s, theta) else { continue };
        for (planes, sign) in [(&env.upper, 1.0), (&env.lower, -1.0)] {
            for p in planes.iter() {
                let grid = at_grid_shift(c, s, theta, p, sign)(400);
                assert!((grid - p.shift).abs() <= 1e-5, "shift {} vs grid {grid}", p.shift);
                assert!(grid <= p.shift + 1e-12);
            }
        }
        checked += 1;
    }
}

#[test]
fn envelopes_admit_rank_one_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..50 {
        let vi = random_interval(&mut rng, 0.9, 1.1, 0.01);
        let vj = random_interval(&mut rng, 0.9, 1.1, 0.01);
        let theta = random_interval(&mut rng, -0.6, 0.6, 0.02);
        let b = edge_box(vi, vj, theta);
        let Some(env) = arctan_envelope(b.c, b.s, b.theta) else { continue };
        for _ in 0..200 {
            let (a, m, t) = (rng.gen_range(vi.lo..=vi.hi), rng.gen_range(vj.lo..=vj.hi), rng.gen_range(theta.lo..=theta.hi));
            let (c, s) = (a * m * t.cos(), a * m * t.sin());
            assert!(env.admits(c, s, t, 1e-9), "({c}, {s}, {t})");
        }
    }
}

#[test]
fn minors_of_rank_one_and_rank_two_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let mut vec = |n: usize| -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    };
    for n in 2..=8 {
        for _ in 0..20 {
            let a = vec(n);
            assert!(max_minor_modulus(&outer(&a)) <= 1e-10);
            let b = vec(n);
            let x: DMatrix<Complex64> = outer(&a) + outer(&b);
            assert!(max_minor_modulus(&x) >= 1e-3);
        }
    }
}

#[test]
fn lifted_ac_points_satisfy_the_edge_minors() {
    let net = load("case14_ieee");
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..50 {
        let v = random_voltages(&net, &mut rng, 0.5);
        let p = lifted(&net, &v);
        for (e, ed) in net.edges.iter().enumerate() {
            assert!(edge_rank_residual(p.cii[ed.from], p.cii[ed.to], p.c[e], p.s[e]).abs() < 1e-12);
        }
    }
}
