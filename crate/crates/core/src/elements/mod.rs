//! Lagrange spaces of degree 1 to 3 on simplices, quadrature, mass matrices
//! and the per-node geometric factors used by the viscosity.

mod basis;
mod geometry;
mod quadrature;
mod space;

pub use basis::LagrangeBasis;
pub use geometry::{patch_indicator, reference_stencil, viscosity_constant, NodalGeometry};
pub use quadrature::{gauss_legendre, SimplexQuadrature};
pub use space::{BoundaryFacet, LagrangeSpace, Tabulation};
