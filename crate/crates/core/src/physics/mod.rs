//! Conservation laws: ideal MHD and linear advection.

pub mod mhd;
mod real;

pub use mhd::{Mhd2d, Primitive};
pub use real::{Dual, Real};

use crate::error::Result;

/// A system `∂_t U + div F(U) = 0` with `ncomp` conserved components in `D`
/// space dimensions.
pub trait ConservationLaw<const D: usize>: Sync {
    fn ncomp(&self) -> usize;

    /// `out[c][a]` is component `c` of the flux in direction `a`.
    fn flux<T: Real>(&self, u: &[T], out: &mut [[T; D]]);

    /// Upper bound on the largest characteristic speed at a state.
    fn max_wave_speed(&self, u: &[f64]) -> Result<f64>;

    /// Rejects non-physical states.
    fn check_state(&self, _u: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Components entering the residual indicator; multi-component groups are
    /// treated as vectors.
    fn indicator_groups(&self) -> Vec<Vec<usize>> {
        (0..self.ncomp()).map(|c| vec![c]).collect()
    }

    fn momentum(&self) -> Option<[usize; D]> {
        None
    }

    fn magnetic(&self) -> Option<[usize; 2]> {
        None
    }

    fn names(&self) -> Vec<&'static str> {
        vec!["u"; self.ncomp()]
    }
}

/// `∂_t u + div(β u) = 0` with constant velocity β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearAdvection<const D: usize> {
    pub velocity: [f64; D],
}

impl<const D: usize> ConservationLaw<D> for LinearAdvection<D> {
    fn ncomp(&self) -> usize {
        1
    }

    fn flux<T: Real>(&self, u: &[T], out: &mut [[T; D]]) {
        for a in 0..D {
            out[0][a] = T::from(self.velocity[a]) * u[0];
        }
    }

    fn max_wave_speed(&self, _u: &[f64]) -> Result<f64> {
        Ok(self.velocity.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}
