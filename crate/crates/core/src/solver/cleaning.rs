use rayon::prelude::*;

use crate::elements::LagrangeSpace;
use crate::error::Result;
use crate::linalg::{cg_solve, CgOptions, CsrMatrix};

/// Loads `(∂_x b_x + ∂_y b_y, φ_i)`.
pub fn divergence_load(space: &LagrangeSpace<2>, bx: &[f64], by: &[f64]) -> Vec<f64> {
    cell_load(space, |dofs, _v, g| {
        dofs.iter()
            .enumerate()
            .map(|(n, &i)| bx[i] * g[n][0] + by[i] * g[n][1])
            .sum()
    })
}

/// Loads `(∂_a ψ, φ_i)` for `a = 0, 1`.
pub fn gradient_load(space: &LagrangeSpace<2>, psi: &[f64]) -> [Vec<f64>; 2] {
    let grad = |a: usize| {
        cell_load(space, |dofs, _v, g| {
            dofs.iter().enumerate().map(|(n, &i)| psi[i] * g[n][a]).sum()
        })
    };
    [grad(0), grad(1)]
}

/// `Σ_K ∫_K s(x) φ_i` where `s` is evaluated per quadrature point from the
/// cell dofs, basis values and physical gradients.
fn cell_load(space: &LagrangeSpace<2>, s: impl Fn(&[usize], &[f64], &[[f64; 2]]) -> f64 + Sync) -> Vec<f64> {
    let nloc = space.nloc();
    let rule = space.quadrature();
    let locals: Vec<Vec<f64>> = (0..space.num_cells())
        .into_par_iter()
        .map(|c| {
            let dofs = space.cell_dofs(c);
            let mut g = vec![[0.0; 2]; nloc];
            let mut loc = vec![0.0; nloc];
            for q in 0..rule.len() {
                let v = space.values(q);
                space.gradients(c, q, &mut g);
                let w = rule.weights[q] * space.measure(c) * s(dofs, v, &g);
                for n in 0..nloc {
                    loc[n] += w * v[n];
                }
            }
            loc
        })
        .collect();
    let mut out = vec![0.0; space.ndof()];
    for (c, loc) in locals.iter().enumerate() {
        for (n, &i) in space.cell_dofs(c).iter().enumerate() {
            out[i] += loc[n];
        }
    }
    out
}

/// Result of one cleaning pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleaningReport {
    /// `‖div_h B‖_{L²}` of the mass-projected divergence before and after.
    pub div_before: f64,
    pub div_after: f64,
    pub poisson_iterations: usize,
}

/// Projection operators for divergence cleaning and divergence diagnostics.
#[derive(Debug, Clone)]
pub struct DivergenceCleaner {
    mass: CsrMatrix,
    mass_diag: Vec<f64>,
    stiffness: CsrMatrix,
    stiffness_diag: Vec<f64>,
    pub mass_opts: CgOptions,
    pub poisson_opts: CgOptions,
}

impl DivergenceCleaner {
    pub fn new(space: &LagrangeSpace<2>, mass: CsrMatrix) -> Self {
        let stiffness = space.stiffness();
        Self {
            mass_diag: mass.diagonal(),
            mass,
            stiffness_diag: stiffness.diagonal(),
            stiffness,
            mass_opts: CgOptions::mass(),
            poisson_opts: CgOptions::poisson(),
        }
    }

    /// Nodal values of the L² projection of `div B_h`.
    pub fn projected_divergence(&self, space: &LagrangeSpace<2>, bx: &[f64], by: &[f64]) -> Result<Vec<f64>> {
        let load = divergence_load(space, bx, by);
        Ok(cg_solve(&self.mass, &load, &self.mass_diag, None, self.mass_opts)?.x)
    }

    /// `‖div_h B‖_{L²}` of the projected divergence.
    pub fn divergence_norm(&self, space: &LagrangeSpace<2>, bx: &[f64], by: &[f64]) -> Result<f64> {
        let d = self.projected_divergence(space, bx, by)?;
        Ok(mass_norm(&self.mass, &d))
    }

    /// Solves `(∇ψ, ∇v) = −(div B', v)` with zero mean, projects `∇ψ` onto
    /// the vector space with the consistent mass matrix and subtracts it.
    pub fn clean(&self, space: &LagrangeSpace<2>, bx: &mut [f64], by: &mut [f64]) -> Result<CleaningReport> {
        let div_before = self.divergence_norm(space, bx, by)?;
        let rhs: Vec<f64> = divergence_load(space, bx, by).iter().map(|x| -x).collect();
        let poisson = cg_solve(&self.stiffness, &rhs, &self.stiffness_diag, None, self.poisson_opts)?;
        let loads = gradient_load(space, &poisson.x);
        let grads = loads
            .par_iter()
            .map(|l| cg_solve(&self.mass, l, &self.mass_diag, None, self.mass_opts).map(|r| r.x))
            .collect::<Result<Vec<_>>>()?;
        bx.iter_mut().zip(&grads[0]).for_each(|(b, g)| *b -= g);
        by.iter_mut().zip(&grads[1]).for_each(|(b, g)| *b -= g);
        let div_after = self.divergence_norm(space, bx, by)?;
        Ok(CleaningReport {
            div_before,
            div_after,
            poisson_iterations: poisson.iterations,
        })
    }
}

/// `sqrt(xᵀ M x)`.
pub fn mass_norm(mass: &CsrMatrix, x: &[f64]) -> f64 {
    let mx = mass.mul_vec(x);
    x.iter().zip(&mx).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
}

/// Relative divergence error `‖div_h B‖ / ‖curl B‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceError {
    pub delta: f64,
    pub div_norm: f64,
    pub curl_norm: f64,
    /// Set when the curl norm is negligible and the denominator was guarded.
    pub degenerate_curl: bool,
}

/// Relative divergence error of a P_k magnetic field.
pub fn divergence_error(space: &LagrangeSpace<2>, bx: &[f64], by: &[f64]) -> Result<DivergenceError> {
    let cleaner = DivergenceCleaner::new(space, space.consistent_mass());
    divergence_error_with(&cleaner, space, bx, by)
}

pub fn divergence_error_with(
    cleaner: &DivergenceCleaner,
    space: &LagrangeSpace<2>,
    bx: &[f64],
    by: &[f64],
) -> Result<DivergenceError> {
    let div_norm = cleaner.divergence_norm(space, bx, by)?;
    let curl_norm = curl_norm(space, bx, by);
    let scale = field_l2(space, bx, by).max(f64::MIN_POSITIVE);
    let degenerate_curl = curl_norm <= 1e-12 * scale;
    let denom = if degenerate_curl { 1e-12 * scale } else { curl_norm };
    Ok(DivergenceError {
        delta: div_norm / denom,
        div_norm,
        curl_norm,
        degenerate_curl,
    })
}

fn curl_norm(space: &LagrangeSpace<2>, bx: &[f64], by: &[f64]) -> f64 {
    quadrature_sum(space, |dofs, _v, g| {
        let curl: f64 = dofs
            .iter()
            .enumerate()
            .map(|(n, &i)| by[i] * g[n][0] - bx[i] * g[n][1])
            .sum();
        curl * curl
    })
    .sqrt()
}

fn field_l2(space: &LagrangeSpace<2>, bx: &[f64], by: &[f64]) -> f64 {
    quadrature_sum(space, |dofs, v, _g| {
        let (x, y) = dofs
            .iter()
            .zip(v)
            .fold((0.0, 0.0), |(x, y), (&i, p)| (x + bx[i] * p, y + by[i] * p));
        x * x + y * y
    })
    .sqrt()
}

fn quadrature_sum(space: &LagrangeSpace<2>, f: impl Fn(&[usize], &[f64], &[[f64; 2]]) -> f64 + Sync) -> f64 {
    let nloc = space.nloc();
    let rule = space.quadrature();
    let parts: Vec<f64> = (0..space.num_cells())
        .into_par_iter()
        .map(|c| {
            let dofs = space.cell_dofs(c);
            let mut g = vec![[0.0; 2]; nloc];
            (0..rule.len())
                .map(|q| {
                    space.gradients(c, q, &mut g);
                    rule.weights[q] * space.measure(c) * f(dofs, space.values(q), &g)
                })
                .sum::<f64>()
        })
        .collect();
    parts.iter().sum()
}
