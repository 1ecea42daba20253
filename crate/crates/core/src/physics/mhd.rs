//! Ideal MHD in two space dimensions, `U = (ρ, m_x, m_y, E, B_x, B_y)`.

use super::{ConservationLaw, Real};
use crate::error::{Error, Result};

pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const ENERGY: usize = 3;
pub const BX: usize = 4;
pub const BY: usize = 5;
pub const NCOMP: usize = 6;

/// Primitive variables `(ρ, u, p, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 2],
    pub p: f64,
    pub b: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mhd2d {
    pub gamma: f64,
}

impl Mhd2d {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    pub fn conserved(&self, w: &Primitive) -> [f64; NCOMP] {
        let ke = 0.5 * w.rho * (w.u[0] * w.u[0] + w.u[1] * w.u[1]);
        let me = 0.5 * (w.b[0] * w.b[0] + w.b[1] * w.b[1]);
        [
            w.rho,
            w.rho * w.u[0],
            w.rho * w.u[1],
            w.p / (self.gamma - 1.0) + ke + me,
            w.b[0],
            w.b[1],
        ]
    }

    pub fn primitive(&self, u: &[f64]) -> Result<Primitive> {
        let p = pressure(u, self.gamma)?;
        Ok(Primitive {
            rho: u[RHO],
            u: [u[MX] / u[RHO], u[MY] / u[RHO]],
            p,
            b: [u[BX], u[BY]],
        })
    }
}

/// `p = (γ − 1)(E − ½ρ|u|² − ½|B|²)`.
pub fn pressure(u: &[f64], gamma: f64) -> Result<f64> {
    if !(u[RHO] > 0.0) {
        return Err(Error::InvalidState(format!("non-positive density {:e}", u[RHO])));
    }
    Ok((gamma - 1.0) * internal_energy(u))
}

fn internal_energy<T: Real>(u: &[T]) -> T {
    let half = T::from(0.5);
    u[ENERGY] - half * (u[MX] * u[MX] + u[MY] * u[MY]) / u[RHO] - half * (u[BX] * u[BX] + u[BY] * u[BY])
}

/// MHD flux: rows `(m, m⊗u + pI − β, u(E + p) − u·β, B⊗u − u⊗B)` with the
/// Maxwell stress `β = −½|B|²I + B⊗B`. Column `a` is the flux in direction `a`.
pub fn flux<T: Real>(u: &[T], gamma: f64, out: &mut [[T; 2]]) {
    let rho = u[RHO];
    let vel = [u[MX] / rho, u[MY] / rho];
    let b = [u[BX], u[BY]];
    let p = T::from(gamma - 1.0) * internal_energy(u);
    let b2 = b[0] * b[0] + b[1] * b[1];
    let half_b2 = T::from(0.5) * b2;
    let zero = T::from(0.0);
    for a in 0..2 {
        out[RHO][a] = u[MX + a];
        for r in 0..2 {
            let delta = if r == a { p + half_b2 } else { zero };
            out[MX + r][a] = u[MX + r] * vel[a] + delta - b[r] * b[a];
        }
        let u_dot_beta = -vel[a] * half_b2 + (vel[0] * b[0] + vel[1] * b[1]) * b[a];
        out[ENERGY][a] = vel[a] * (u[ENERGY] + p) - u_dot_beta;
        for r in 0..2 {
            out[BX + r][a] = b[r] * vel[a] - vel[r] * b[a];
        }
    }
}

/// Characteristic speeds in direction `e` (unit vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub sound: f64,
    pub alfven: f64,
    pub slow: f64,
    pub fast: f64,
    pub normal_velocity: f64,
}

impl WaveSpeeds {
    /// `λ_1..λ_8 = u·e ∓ c_f, u·e ∓ c_a, u·e ∓ c_s, u·e, u·e` in ascending order.
    pub fn eigenvalues(&self) -> [f64; 8] {
        let un = self.normal_velocity;
        [
            un - self.fast,
            un - self.alfven,
            un - self.slow,
            un,
            un,
            un + self.slow,
            un + self.alfven,
            un + self.fast,
        ]
    }
}

pub fn wave_speeds(u: &[f64], gamma: f64, e: [f64; 2]) -> Result<WaveSpeeds> {
    let p = pressure(u, gamma)?;
    if !(p > 0.0) {
        return Err(Error::InvalidState(format!("non-positive pressure {p:e}")));
    }
    let rho = u[RHO];
    let a2 = gamma * p / rho;
    let b2 = (u[BX] * u[BX] + u[BY] * u[BY]) / rho;
    let bn = (u[BX] * e[0] + u[BY] * e[1]) / rho.sqrt();
    let sum = a2 + b2;
    let disc = (sum * sum - 4.0 * a2 * bn * bn).max(0.0).sqrt();
    let cf2 = 0.5 * (sum + disc);
    // c_s² c_f² = a² b², avoids cancellation in ½(sum − disc)
    let cs2 = if cf2 > 0.0 { a2 * bn * bn / cf2 } else { 0.0 };
    Ok(WaveSpeeds {
        sound: a2.sqrt(),
        alfven: bn.abs(),
        slow: cs2.sqrt(),
        fast: cf2.sqrt(),
        normal_velocity: (u[MX] * e[0] + u[MY] * e[1]) / rho,
    })
}

pub fn fast_speed(u: &[f64], gamma: f64, e: [f64; 2]) -> Result<f64> {
    Ok(wave_speeds(u, gamma, e)?.fast)
}

pub fn slow_speed(u: &[f64], gamma: f64, e: [f64; 2]) -> Result<f64> {
    Ok(wave_speeds(u, gamma, e)?.slow)
}

/// Direction-free bound `|u| + √(a² + |B|²/ρ) ≥ max_e |u·e| + c_f(e)`.
pub fn max_speed_bound(u: &[f64], gamma: f64) -> Result<f64> {
    let p = pressure(u, gamma)?;
    if !(p > 0.0) {
        return Err(Error::InvalidState(format!("non-positive pressure {p:e}")));
    }
    let rho = u[RHO];
    let speed = (u[MX] * u[MX] + u[MY] * u[MY]).sqrt() / rho;
    let b2 = (u[BX] * u[BX] + u[BY] * u[BY]) / rho;
    Ok(speed + (gamma * p / rho + b2).sqrt())
}

impl ConservationLaw<2> for Mhd2d {
    fn ncomp(&self) -> usize {
        NCOMP
    }

    fn flux<T: Real>(&self, u: &[T], out: &mut [[T; 2]]) {
        flux(u, self.gamma, out)
    }

    fn max_wave_speed(&self, u: &[f64]) -> Result<f64> {
        max_speed_bound(u, self.gamma)
    }

    fn check_state(&self, u: &[f64]) -> Result<()> {
        if !(u[RHO] > 0.0) {
            return Err(Error::InvalidState(format!("density {:e}", u[RHO])));
        }
        let e = internal_energy(u);
        if !(e > 0.0) {
            return Err(Error::InvalidState(format!("internal energy {e:e}")));
        }
        Ok(())
    }

    fn indicator_groups(&self) -> Vec<Vec<usize>> {
        vec![vec![RHO], vec![MX, MY], vec![ENERGY], vec![BX, BY]]
    }

    fn momentum(&self) -> Option<[usize; 2]> {
        Some([MX, MY])
    }

    fn magnetic(&self) -> Option<[usize; 2]> {
        Some([BX, BY])
    }

    fn names(&self) -> Vec<&'static str> {
        vec!["rho", "mx", "my", "E", "Bx", "By"]
    }
}
