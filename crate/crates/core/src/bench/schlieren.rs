use crate::elements::LagrangeSpace;
use crate::error::Result;
use crate::linalg::{cg_solve, CgOptions};
use crate::solver::gradient_load;

/// Nodal gradient of a P_k field by lumped-mass L² projection. Spaces with
/// vanishing lumped masses (P2 vertices) fall back to the consistent mass.
pub fn nodal_gradient(space: &LagrangeSpace<2>, x: &[f64]) -> Result<[Vec<f64>; 2]> {
    let loads = gradient_load(space, x);
    let lumped = space.lumped_mass();
    let max = lumped.iter().copied().fold(0.0, f64::max);
    if lumped.iter().all(|&m| m > 1e-12 * max) {
        let [gx, gy] = loads;
        let div = |g: Vec<f64>| g.iter().zip(&lumped).map(|(a, m)| a / m).collect();
        return Ok([div(gx), div(gy)]);
    }
    let mass = space.consistent_mass();
    let diag = mass.diagonal();
    let solve = |b: &[f64]| cg_solve(&mass, b, &diag, None, CgOptions::mass()).map(|r| r.x);
    Ok([solve(&loads[0])?, solve(&loads[1])?])
}

/// σ_i = exp(−ζ |∇ρ|_i / max |∇ρ|); identically one for a constant field.
pub fn schlieren(space: &LagrangeSpace<2>, rho: &[f64], zeta: f64) -> Result<Vec<f64>> {
    let [gx, gy] = nodal_gradient(space, rho)?;
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let max = mag.iter().copied().fold(0.0, f64::max);
    let scale = rho.iter().fold(0.0f64, |m, v| m.max(v.abs())) / space.mesh().diameter();
    if !(max > 1e-10 * scale) {
        return Ok(vec![1.0; rho.len()]);
    }
    Ok(mag.iter().map(|g| (-zeta * g / max).exp()).collect())
}
