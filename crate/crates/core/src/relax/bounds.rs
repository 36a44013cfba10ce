use std::f64::consts::FRAC_PI_2;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::case::PowerNetwork;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn is_subset_of(&self, o: &Interval, tol: f64) -> bool {
        self.lo >= o.lo - tol && self.hi <= o.hi + tol
    }

    pub fn negated(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let r = Interval::new(self.lo.max(o.lo), self.hi.min(o.hi));
        (r.lo <= r.hi).then_some(r)
    }

    /// Largest magnitude in the interval.
    pub fn radius(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Box of one edge's `(c, s)` and of `theta_to - theta_from`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeBox {
    pub c: Interval,
    pub s: Interval,
    pub theta: Interval,
}

impl EdgeBox {
    /// The same box seen from the other end: `s` and `theta` flip sign.
    pub fn reversed(&self) -> EdgeBox {
        EdgeBox { c: self.c, s: self.s.negated(), theta: self.theta.negated() }
    }
}

/// Box implied by voltage-magnitude intervals at both ends and an angle
/// interval inside `[-pi/2, pi/2]`.
pub fn edge_box(vi: Interval, vj: Interval, theta: Interval) -> EdgeBox {
    let (lo, hi) = (vi.lo * vj.lo, vi.hi * vj.hi);
    // cos is unimodal on [-pi/2, pi/2], so its minimum is at an endpoint.
    let cos_min = theta.lo.cos().min(theta.hi.cos()).max(0.0);
    let c = Interval::new(lo * cos_min, hi);
    let (sl, sh) = (theta.lo.sin(), theta.hi.sin());
    let s = Interval::new(if sl >= 0.0 { lo * sl } else { hi * sl }, if sh >= 0.0 { hi * sh } else { lo * sh });
    EdgeBox { c, s, theta }
}

/// Boxes on `c_ii` per bus and on `(c, s, theta)` per edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableBounds {
    pub bus: Vec<Interval>,
    pub edges: Vec<EdgeBox>,
}

impl VariableBounds {
    /// Boxes implied by the voltage and angle-difference limits alone.
    pub fn initial(net: &PowerNetwork) -> Self {
        let bus: Vec<Interval> =
            net.buses.iter().map(|b| Interval::new(b.v_min * b.v_min, b.v_max * b.v_max)).collect();
        let edges = net
            .edges
            .iter()
            .map(|e| {
                let (mut lo, mut hi) = e.theta;
                if lo < -FRAC_PI_2 || hi > FRAC_PI_2 {
                    if lo > -2.0 * std::f64::consts::PI || hi < 2.0 * std::f64::consts::PI {
                        warn!(
                            "angle limits of edge {}-{} exceed pi/2 and are clamped",
                            net.buses[e.from].id, net.buses[e.to].id
                        );
                    }
                    lo = lo.max(-FRAC_PI_2);
                    hi = hi.min(FRAC_PI_2);
                }
                let vi = Interval::new(net.buses[e.from].v_min, net.buses[e.from].v_max);
                let vj = Interval::new(net.buses[e.to].v_min, net.buses[e.to].v_max);
                edge_box(vi, vj, Interval::new(lo, hi))
            })
            .collect();
        Self { bus, edges }
    }

    pub fn is_subset_of(&self, o: &VariableBounds, tol: f64) -> bool {
        self.bus.iter().zip(&o.bus).all(|(a, b)| a.is_subset_of(b, tol))
            && self.edges.iter().zip(&o.edges).all(|(a, b)| {
                a.c.is_subset_of(&b.c, tol) && a.s.is_subset_of(&b.s, tol) && a.theta.is_subset_of(&b.theta, tol)
            })
    }

    /// Whether the lifted image of a point lies in every box.
    pub fn contains(&self, p: &super::LiftedPoint, tol: f64) -> bool {
        self.bus.iter().zip(&p.cii).all(|(b, &x)| b.contains(x, tol))
            && self
                .edges
                .iter()
                .enumerate()
                .all(|(e, b)| b.c.contains(p.c[e], tol) && b.s.contains(p.s[e], tol))
    }
}
