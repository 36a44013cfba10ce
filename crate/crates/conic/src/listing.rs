use std::fmt::Write;

use crate::program::ConicProgram;

/// Plain-text listing of a program, one record per line:
///
/// ```text
/// conic-program 1
/// vars <n> rows <m>
/// offset <c0>
/// c <col> <value>          nonzero objective entries
/// a <row> <col> <value>    equality entries in input order
/// b <row> <value>          nonzero right-hand sides
/// cone <kind> <dim>        in variable order; psd dim is the matrix order
/// handle <name> <row>
/// ```
///
/// Values use Rust's shortest round-trip float formatting.
pub fn write_listing(p: &ConicProgram) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "conic-program 1");
    let _ = writeln!(s, "vars {} rows {}", p.num_vars(), p.num_rows());
    let _ = writeln!(s, "offset {:?}", p.objective_offset);
    for (k, &c) in p.objective.iter().enumerate() {
        if c != 0.0 {
            let _ = writeln!(s, "c {k} {c:?}");
        }
    }
    for k in 0..p.eq_vals.len() {
        let _ = writeln!(s, "a {} {} {:?}", p.eq_rows[k], p.eq_cols[k], p.eq_vals[k]);
    }
    for (k, &b) in p.rhs.iter().enumerate() {
        if b != 0.0 {
            let _ = writeln!(s, "b {k} {b:?}");
        }
    }
    for c in &p.cones {
        let dim = match *c {
            crate::Cone::Psd(n) => n,
            _ => c.span(),
        };
        let _ = writeln!(s, "cone {} {}", c.name(), dim);
    }
    for (name, row) in &p.handles {
        let _ = writeln!(s, "handle {name} {row}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Cone, LinExpr, Model, Sense};

    #[test]
    fn listing_mentions_every_part() {
        let mut m = Model::new();
        let x = m.add_var();
        let r = m.add_row(x.into(), Sense::Ge, 1.0);
        m.name_row(r, "x_lo");
        m.add_psd(2, vec![LinExpr::constant(1.0), x.into(), LinExpr::constant(1.0)]);
        m.minimize(x.into());
        let (p, _) = m.lower();
        let s = write_listing(&p);
        assert!(s.starts_with("conic-program 1\n"));
        assert!(s.contains("cone psd 2"));
        assert!(s.contains("handle x_lo 0"));
        assert!(s.contains("c 0 1.0"));
        assert_eq!(p.cones[0], Cone::Free(1));
    }
}
