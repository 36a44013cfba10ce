//! Linear envelopes of `theta = atan(s / c)` over a box in `(c, s)`.

use std::f64::consts::FRAC_PI_2;

use super::Interval;

/// `gamma + alpha c + beta s`, with `gamma` already shifted by `shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtPlane {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Offset added (upper) or subtracted (lower) to make the plane valid.
    pub shift: f64,
}

impl AtPlane {
    pub fn eval(&self, c: f64, s: f64) -> f64 {
        self.gamma + self.alpha * c + self.beta * s
    }
}

/// Two planes above and two below `atan(s/c)` on the restricted region
/// `box ∩ {c tan(theta_lo) <= s <= c tan(theta_hi)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArctanEnvelope {
    pub upper: [AtPlane; 2],
    pub lower: [AtPlane; 2],
}

impl ArctanEnvelope {
    /// Whether `theta` lies between the planes at `(c, s)` up to `tol`.
    pub fn admits(&self, c: f64, s: f64, theta: f64, tol: f64) -> bool {
        self.upper.iter().all(|p| theta <= p.eval(c, s) + tol) && self.lower.iter().all(|p| theta >= p.eval(c, s) - tol)
    }
}

const FLAT: f64 = 1e-10;

/// Vertices of the restricted region in counter-clockwise order; empty when
/// the region is empty. Requires `c.lo > 0`.
pub fn restricted_region(c: Interval, s: Interval, theta: Interval) -> Vec<(f64, f64)> {
    let mut poly = vec![(c.lo, s.lo), (c.hi, s.lo), (c.hi, s.hi), (c.lo, s.hi)];
    // Half-planes a0 c + a1 s <= 0.
    let mut cuts = Vec::new();
    if theta.hi < FRAC_PI_2 {
        cuts.push((-theta.hi.tan(), 1.0));
    }
    if theta.lo > -FRAC_PI_2 {
        cuts.push((theta.lo.tan(), -1.0));
    }
    for (a0, a1) in cuts {
        let f = |p: (f64, f64)| a0 * p.0 + a1 * p.1;
        let mut out = Vec::new();
        for k in 0..poly.len() {
            let p = poly[k];
            let q = poly[(k + 1) % poly.len()];
            let (fp, fq) = (f(p), f(q));
            if fp <= 0.0 {
                out.push(p);
            }
            if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
                let t = fp / (fp - fq);
                out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
            }
        }
        poly = out;
        if poly.is_empty() {
            break;
        }
    }
    poly.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
    poly
}

fn plane(pivot: (f64, f64), th_pivot: f64, dc: f64, slope_c: f64, ds: f64, slope_s: f64) -> (f64, f64, f64) {
    let d = 1.0 / (pivot.0 * pivot.0 + pivot.1 * pivot.1);
    let alpha = if dc > FLAT { slope_c / dc } else { -pivot.1 * d };
    let beta = if ds > FLAT { slope_s / ds } else { pivot.0 * d };
    (th_pivot - alpha * pivot.0 - beta * pivot.1, alpha, beta)
}

/// Largest value of `sign * (atan(s/c) - (gamma + alpha c + beta s))` over the
/// polygon. Along rays through the origin the objective is linear, so only
/// vertices and stationary points of the axis-parallel edges matter.
fn max_violation(poly: &[(f64, f64)], gamma: f64, alpha: f64, beta: f64, sign: f64) -> f64 {
    let h = |c: f64, s: f64| sign * ((s / c).atan() - (gamma + alpha * c + beta * s));
    let mut best = f64::NEG_INFINITY;
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        best = best.max(h(p.0, p.1));
        if (p.0 - q.0).abs() <= 1e-14 * p.0.abs().max(1.0) {
            // c fixed: c / (c^2 + s^2) = beta.
            let c0 = p.0;
            if beta > 0.0 {
                let r = c0 / beta - c0 * c0;
                if r >= 0.0 {
                    let (lo, hi) = (p.1.min(q.1), p.1.max(q.1));
                    for sv in [r.sqrt(), -r.sqrt()] {
                        if sv >= lo && sv <= hi {
                            best = best.max(h(c0, sv));
                        }
                    }
                }
            }
        } else if (p.1 - q.1).abs() <= 1e-14 * p.1.abs().max(1.0) {
            // s fixed: -s / (c^2 + s^2) = alpha.
            let s0 = p.1;
            if alpha != 0.0 {
                let r = -s0 / alpha - s0 * s0;
                if r >= 0.0 {
                    let cv = r.sqrt();
                    if cv >= p.0.min(q.0) && cv <= p.0.max(q.0) {
                        best = best.max(h(cv, s0));
                    }
                }
            }
        }
    }
    best
}

/// Envelopes from the planes through three of the four box corners, shifted
/// by the largest violation over the restricted region. `None` when
/// `c.lo <= 0` or the region is empty.
pub fn arctan_envelope(c: Interval, s: Interval, theta: Interval) -> Option<ArctanEnvelope> {
    if c.lo <= 0.0 {
        return None;
    }
    let poly = restricted_region(c, s, theta);
    if poly.is_empty() {
        return None;
    }
    let z = [(c.lo, s.hi), (c.hi, s.hi), (c.hi, s.lo), (c.lo, s.lo)];
    let t: Vec<f64> = z.iter().map(|p| (p.1 / p.0).atan()).collect();
    let (dc, ds) = (c.width(), s.width());
    // Pivot corner shares s with one partner and c with the other.
    let p1 = plane(z[1], t[1], dc, t[1] - t[0], ds, t[1] - t[2]);
    let p2 = plane(z[3], t[3], dc, t[2] - t[3], ds, t[0] - t[3]);
    let p3 = plane(z[0], t[0], dc, t[1] - t[0], ds, t[0] - t[3]);
    let p4 = plane(z[2], t[2], dc, t[2] - t[3], ds, t[1] - t[2]);
    let up = |(g, a, b): (f64, f64, f64)| {
        let d = max_violation(&poly, g, a, b, 1.0);
        AtPlane { gamma: g + d, alpha: a, beta: b, shift: d }
    };
    let down = |(g, a, b): (f64, f64, f64)| {
        let d = max_violation(&poly, g, a, b, -1.0);
        AtPlane { gamma: g - d, alpha: a, beta: b, shift: d }
    };
    Some(ArctanEnvelope { upper: [up(p1), up(p2)], lower: [down(p3), down(p4)] })
}
