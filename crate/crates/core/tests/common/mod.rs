#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Write;
use std::path::PathBuf;

use acopf_core::case::{build_network, load_case, parse_matpower_case, PowerNetwork};
use acopf_core::relax::{LiftedPoint, VariableBounds};
use num_complex::Complex64;
use rand::Rng;

pub fn case_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases").join(format!("{name}.m"))
}

pub fn load(name: &str) -> PowerNetwork {
    load_case(case_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// A lossless network on `nb` buses with the given 1-based branches, a
/// generator at bus 1, small loads elsewhere, `V in [0.9, 1.1]` and angle
/// limits of `angle` degrees.
pub fn network_from_edges(nb: usize, edges: &[(usize, usize)], angle: f64) -> PowerNetwork {
    let mut s = String::from("mpc.baseMVA = 100;\nmpc.bus = [\n");
    for i in 1..=nb {
        let (kind, pd) = if i == 1 { (3, 0.0) } else { (1, 10.0) };
        writeln!(s, "{i} {kind} {pd} 2 0 0 1 1 0 100 1 1.1 0.9;").unwrap();
    }
    s.push_str("];\nmpc.gen = [\n1 0 0 300 -300 1 100 1 500 0;\n];\nmpc.gencost = [\n2 0 0 3 0.01 1 0;\n];\nmpc.branch = [\n");
    for &(a, b) in edges {
        writeln!(s, "{a} {b} 0.01 0.1 0.02 0 0 0 0 0 1 {} {};", -angle, angle).unwrap();
    }
    s.push_str("];\n");
    build_network(&parse_matpower_case(&s).unwrap()).unwrap()
}

/// The cycle `1 - 2 - ... - n - 1`.
pub fn ring(n: usize, angle: f64) -> PowerNetwork {
    let edges: Vec<(usize, usize)> = (1..=n).map(|i| (i, i % n + 1)).collect();
    network_from_edges(n, &edges, angle)
}

/// Random voltages with magnitudes in the bus limits and angles drawn so
/// that edge differences are often inside the angle boxes; `None` when the
/// lifted image leaves `bounds`.
pub fn random_voltages(net: &PowerNetwork, rng: &mut impl Rng, spread: f64) -> Vec<Complex64> {
    net.buses
        .iter()
        .map(|b| {
            let m = rng.gen_range(b.v_min..=b.v_max);
            Complex64::from_polar(m, rng.gen_range(-spread..=spread))
        })
        .collect()
}

pub fn lifted(net: &PowerNetwork, v: &[Complex64]) -> LiftedPoint {
    let cii = v.iter().map(|x| x.norm_sqr()).collect();
    let mut c = Vec::new();
    let mut s = Vec::new();
    for e in &net.edges {
        let x = v[e.from] * v[e.to].conj();
        c.push(x.re);
        s.push(-x.im);
    }
    LiftedPoint { cii, c, s, theta: v.iter().map(|x| x.arg()).collect() }
}

/// A rank-one point whose lifted image lies in `bounds`.
pub fn rank_one_in(net: &PowerNetwork, bounds: &VariableBounds, rng: &mut impl Rng) -> (Vec<Complex64>, LiftedPoint) {
    for spread in (0..1000).map(|k| PI / 6.0 / (1.0 + k as f64 / 50.0)) {
        let v = random_voltages(net, rng, spread);
        let p = lifted(net, &v);
        let angles_ok = net.edges.iter().enumerate().all(|(e, ed)| {
            let d = wrap(v[ed.to].arg() - v[ed.from].arg());
            bounds.edges[e].theta.contains(d, 0.0)
        });
        if angles_ok && bounds.contains(&p, 0.0) {
            return (v, p);
        }
    }
    panic!("no rank-one point found in the boxes");
}

pub fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Grid estimate of an envelope plane's shift: the largest value of
/// `sign * (atan(s/c) - plane_unshifted(c, s))` over an `n x n` grid of the
/// box restricted to the angle interval, plus `n` points on every edge of
/// the restricted polygon.
pub fn at_grid_shift(
    c: acopf_core::relax::Interval,
    s: acopf_core::relax::Interval,
    theta: acopf_core::relax::Interval,
    plane: &acopf_core::relax::AtPlane,
    sign: f64,
) -> impl Fn(usize) -> f64 {
    let gamma = plane.gamma - sign * plane.shift;
    let (alpha, beta) = (plane.alpha, plane.beta);
    move |n: usize| {
        let h = |cv: f64, sv: f64| sign * ((sv / cv).atan() - (gamma + alpha * cv + beta * sv));
        let (tlo, thi) = (theta.lo.tan(), theta.hi.tan());
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let cv = c.lo + c.width() * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let sv = s.lo + s.width() * j as f64 / (n - 1) as f64;
                if sv >= cv * tlo && sv <= cv * thi {
                    best = best.max(h(cv, sv));
                }
            }
        }
        let poly = acopf_core::relax::restricted_region(c, s, theta);
        for k in 0..poly.len() {
            let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
            for i in 0..n {
                let t = i as f64 / (n - 1) as f64;
                best = best.max(h(p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
            }
        }
        best
    }
}

/// Largest `under(x, y) - sqrt(x y)` and largest `sqrt(c^2 + s^2) - over(c, s)`
/// over `n x n` grids of the two boxes; both are nonpositive when the edge
/// cut planes are valid estimators.
pub fn edge_cut_grid_excess(
    cii: acopf_core::relax::Interval,
    cjj: acopf_core::relax::Interval,
    c: acopf_core::relax::Interval,
    s: acopf_core::relax::Interval,
    n: usize,
) -> (f64, f64) {
    let ec = acopf_core::relax::edge_cut_coefficients(cii, cjj, c, s);
    let at = |i: &acopf_core::relax::Interval, k: usize| i.lo + i.width() * k as f64 / (n - 1) as f64;
    let (mut under, mut over) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for a in 0..n {
        let (x, cv) = (at(&cii, a), at(&c, a));
        for b in 0..n {
            let (y, sv) = (at(&cjj, b), at(&s, b));
            let g = (x * y).sqrt();
            let f = cv.hypot(sv);
            for p in &ec.under {
                under = under.max(p.eval(x, y) - g);
            }
            for p in &ec.over {
                over = over.max(f - p.eval(cv, sv));
            }
        }
    }
    (under, over)
}

/// A random subinterval of `[lo, hi]` of width at least `min_width`.
pub fn random_interval(rng: &mut impl Rng, lo: f64, hi: f64, min_width: f64) -> acopf_core::relax::Interval {
    let w = rng.gen_range(min_width..=hi - lo);
    let a = rng.gen_range(lo..=hi - w);
    acopf_core::relax::Interval::new(a, a + w)
}
