//! Global AC optimal power flow.
//!
//! The crate builds second-order cone relaxations of the rectangular AC OPF in
//! the lifted variables `c_ii = |V_i|^2`, `c_ij = Re(V_i conj V_j)` and
//! `s_ij = -Im(V_i conj V_j)`, strengthens them with valid inequalities derived
//! from the 2x2 minors of the rank-one matrix `V V^H` over cycles, tightens the
//! variable boxes, and closes the remaining gap by spatial branch-and-cut.

pub mod case;
pub mod relax;
pub mod cycles;
pub mod sep;
pub mod tighten;
pub mod bnc;
