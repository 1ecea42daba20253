//! Sparse storage and preconditioned conjugate gradients.

mod cg;
mod csr;

pub use cg::{cg_solve, cg_solve_monitored, CgOptions, CgReport};
pub use csr::CsrMatrix;
