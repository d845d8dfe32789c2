//! Point vortices with fixed sources on closed surfaces: Green's functions, energies,
//! dynamics, critical points, planar fiber estimates and blow-up count combinatorics.
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod combinatorics;
pub mod dynamics;
pub mod energy;
pub mod equilibrium;
pub mod error;
pub mod fibers;
pub mod surface;

pub use error::{Error, Result};
