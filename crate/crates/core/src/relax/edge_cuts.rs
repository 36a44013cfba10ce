use super::Interval;

/// `nu + eta * x + delta * y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub nu: f64,
    pub eta: f64,
    pub delta: f64,
}

impl Plane {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.nu + self.eta * x + self.delta * y
    }
}

/// Two planes below `sqrt(c_ii c_jj)` (in `(c_ii, c_jj)`) and two planes
/// above `sqrt(c^2 + s^2)` (in `(c, s)`), each exact at three box corners.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeCutCoefficients {
    pub under: [Plane; 2],
    pub over: [Plane; 2],
}

impl EdgeCutCoefficients {
    /// The four rows `over[n](c, s) >= under[m](c_ii, c_jj)`, each written as
    /// `(a_cii, a_cjj, a_c, a_s, rhs)` for `a . x >= rhs`.
    pub fn rows(&self) -> [[f64; 5]; 4] {
        let mut out = [[0.0; 5]; 4];
        let mut k = 0;
        for u in &self.under {
            for o in &self.over {
                out[k] = [-u.eta, -u.delta, o.eta, o.delta, u.nu - o.nu];
                k += 1;
            }
        }
        out
    }
}

/// Widths below this use derivatives instead of difference quotients.
const FLAT: f64 = 1e-10;

fn norm(c: f64, s: f64) -> f64 {
    c.hypot(s)
}

fn dnorm(c: f64, s: f64) -> (f64, f64) {
    let r = norm(c, s);
    if r == 0.0 {
        (0.0, 0.0)
    } else {
        (c / r, s / r)
    }
}

pub fn edge_cut_coefficients(cii: Interval, cjj: Interval, c: Interval, s: Interval) -> EdgeCutCoefficients {
    let (a, aa) = (cii.lo.max(0.0).sqrt(), cii.hi.max(0.0).sqrt());
    let (b, bb) = (cjj.lo.max(0.0).sqrt(), cjj.hi.max(0.0).sqrt());
    // Planes through (lo, lo), (lo, hi), (hi, lo) and through (hi, hi), (lo, hi), (hi, lo).
    let quot = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let eta1 = quot(b, a + aa);
    let delta1 = quot(a, b + bb);
    let nu1 = a * b - eta1 * cii.lo - delta1 * cjj.lo;
    let eta2 = quot(bb, a + aa);
    let delta2 = quot(aa, b + bb);
    let nu2 = aa * bb - eta2 * cii.hi - delta2 * cjj.hi;

    let (cl, ch, sl, sh) = (c.lo, c.hi, s.lo, s.hi);
    let f_ll = norm(cl, sl);
    let f_lh = norm(cl, sh);
    let f_hl = norm(ch, sl);
    let f_hh = norm(ch, sh);
    let dc = ch - cl;
    let ds = sh - sl;
    // Slope in c along s = sv, and slope in s along c = cv.
    let slope_c = |sv: f64, f_hi: f64, f_lo: f64| if dc > FLAT { (f_hi - f_lo) / dc } else { dnorm(cl, sv).0 };
    let slope_s = |cv: f64, f_hi: f64, f_lo: f64| if ds > FLAT { (f_hi - f_lo) / ds } else { dnorm(cv, sl).1 };
    let disc = f_hh + f_ll - f_hl - f_lh;
    let (eta3, delta3, eta4, delta4) = if disc < 0.0 {
        (slope_c(sl, f_hl, f_ll), slope_s(cl, f_lh, f_ll), slope_c(sh, f_hh, f_lh), slope_s(ch, f_hh, f_hl))
    } else {
        (slope_c(sh, f_hh, f_lh), slope_s(cl, f_lh, f_ll), slope_c(sl, f_hl, f_ll), slope_s(ch, f_hh, f_hl))
    };
    let nu3 = f_ll - eta3 * cl - delta3 * sl;
    let nu4 = f_hh - eta4 * ch - delta4 * sh;
    EdgeCutCoefficients {
        under: [Plane { nu: nu1, eta: eta1, delta: delta1 }, Plane { nu: nu2, eta: eta2, delta: delta2 }],
        over: [Plane { nu: nu3, eta: eta3, delta: delta3 }, Plane { nu: nu4, eta: eta4, delta: delta4 }],
    }
}
