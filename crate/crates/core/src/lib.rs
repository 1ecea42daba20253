//! Continuous Galerkin finite elements for ideal MHD with nodal artificial
//! viscosity on simplex meshes.

pub mod bench;
pub mod elements;
pub mod error;
pub mod field;
pub mod linalg;
pub mod mesh;
pub mod physics;
pub mod scalar;
pub mod solver;
pub mod viscosity;

pub use error::{Error, Result};
pub use field::Field;
