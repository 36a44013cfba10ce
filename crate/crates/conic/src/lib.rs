//! Standard-form conic programs over free, nonnegative, second-order,
//! rotated second-order and PSD cones, solved by a homogeneous self-dual
//! interior-point method.
//!
//! Two layers are exposed:
//!
//! * [`ConicProgram`]: `min c'x  s.t.  A x = b,  x in K1 x ... x Kp`, where the
//!   cone spans partition `x` in order.
//! * [`Model`]: a small modeling builder (free/nonnegative variables, linear
//!   rows, cone constraints on affine expressions) that lowers to a
//!   `ConicProgram`.
//!
//! Dual sign convention: for `min c'x` the equality multipliers `y` satisfy
//! `c - A'y in K*` and the dual objective is `b'y`. A `>=` row therefore has a
//! nonnegative multiplier and a `<=` row a nonpositive one.

use openblas_src as _;

mod listing;
mod model;
mod program;
mod solve;

pub use listing::write_listing;
pub use model::{BoundRows, ConeId, LinExpr, Model, ModelSolution, RowId, Sense, Var};
pub use program::{smat, svec_index, svec_len, Cone, ConicError, ConicProgram, MAX_PSD_ORDER};
pub use solve::{solve, ConicSolution, Residuals, SolveStatus, SolverConfig};
