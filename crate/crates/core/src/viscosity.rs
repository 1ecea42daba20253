//! Nodal artificial viscosity: the first-order coefficient ε^L, the smoothed
//! PDE residual, its normalization Ψ, and the residual viscosity ε^RV ≤ ε^L.

use rayon::prelude::*;

use crate::elements::{LagrangeSpace, NodalGeometry};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{cg_solve, CgOptions, CsrMatrix};
use crate::mesh::PatchTable;
use crate::physics::{ConservationLaw, Dual};

/// One viscosity coefficient per node, shared by all components.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityField {
    pub values: Vec<f64>,
    /// Time level of the state the field was built from.
    pub time: f64,
}

impl ViscosityField {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            time: 0.0,
        }
    }
}

/// Largest wave speed at every node.
pub fn node_wave_speeds<const D: usize, L: ConservationLaw<D>>(law: &L, u: &Field) -> Result<Vec<f64>> {
    (0..u.ndof())
        .into_par_iter()
        .map(|i| {
            let s = u.node(i);
            law.max_wave_speed(&s).map_err(|e| Error::InvalidState(format!("node {i}: {e}")))
        })
        .collect()
}

/// λ_max,i: maximum of the nodal speeds over the fine patch of `i`, node
/// `i` included.
pub fn lambda_max(speeds: &[f64], patch: &PatchTable) -> Vec<f64> {
    (0..speeds.len())
        .map(|i| patch.neighbors(i).iter().map(|&j| speeds[j]).fold(0.0, f64::max))
        .collect()
}

/// ε^L_i = C_i m_i^fine λ_max,i Φ_i.
pub fn first_order_viscosity(lambda: &[f64], geometry: &NodalGeometry) -> Vec<f64> {
    // same association as residual_viscosity so that the cap compares exactly
    lambda
        .iter()
        .enumerate()
        .map(|(i, l)| geometry.c[i] * (l * geometry.phi[i]) * geometry.lumped_fine[i])
        .collect()
}

/// Variable-step BDF approximation of the time derivative at `t^n`.
///
/// `tau_n = t^n − t^{n−1}` and `tau_nm1 = t^{n−1} − t^{n−2}`. With two
/// history levels the second-order formula is used, with one the backward
/// Euler quotient, with none the derivative is zero.
pub fn bdf2_derivative(
    u_n: &[f64],
    u_nm1: Option<&[f64]>,
    u_nm2: Option<&[f64]>,
    tau_n: f64,
    tau_nm1: f64,
) -> Result<Vec<f64>> {
    let Some(u1) = u_nm1 else {
        return Ok(vec![0.0; u_n.len()]);
    };
    if !(tau_n > 0.0) {
        return Err(Error::NonPositiveStep(tau_n));
    }
    match u_nm2 {
        None => Ok(u_n.iter().zip(u1).map(|(a, b)| (a - b) / tau_n).collect()),
        Some(u2) => {
            if !(tau_nm1 > 0.0) {
                return Err(Error::NonPositiveStep(tau_nm1));
            }
            let w = tau_n / tau_nm1;
            // coefficients sum to zero, so differences keep constants exact
            let (c0, c2) = ((1.0 + 2.0 * w) / (1.0 + w), w * w / (1.0 + w));
            Ok((0..u_n.len())
                .map(|i| (c0 * (u_n[i] - u1[i]) + c2 * (u2[i] - u1[i])) / tau_n)
                .collect())
        }
    }
}

/// Smoothed residual `R`: for every component solve
/// `(R, V) + Σ_K (|K|^{2/d}/k)(∇R, ∇V)_K = (|D_τU + div F(U_h)|, V)`.
#[derive(Debug, Clone)]
pub struct ResidualProjector {
    matrix: CsrMatrix,
    diag: Vec<f64>,
    pub tol: f64,
}

impl ResidualProjector {
    pub fn new<const D: usize>(space: &LagrangeSpace<D>) -> Self {
        let k = space.degree() as f64;
        let matrix = space.mass_plus_stiffness(1.0, |c| space.measure(c).powf(2.0 / D as f64) / k);
        let diag = matrix.diagonal();
        Self { matrix, diag, tol: 1e-10 }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Load vectors `(|D_τU + div F(U_h)|, φ_i)` per component.
    pub fn load<const D: usize, L: ConservationLaw<D>>(
        &self,
        space: &LagrangeSpace<D>,
        law: &L,
        u: &Field,
        dtu: &Field,
    ) -> Field {
        residual_load(space, law, u, dtu)
    }

    /// Solves the projection; negative nodal values are clipped to zero.
    pub fn project<const D: usize, L: ConservationLaw<D>>(
        &self,
        space: &LagrangeSpace<D>,
        law: &L,
        u: &Field,
        dtu: &Field,
    ) -> Result<Field> {
        let load = residual_load(space, law, u, dtu);
        let comps = (0..load.ncomp())
            .into_par_iter()
            .map(|c| {
                let opts = CgOptions {
                    rel_tol: self.tol,
                    ..CgOptions::mass()
                };
                let mut r = cg_solve(&self.matrix, load.comp(c), &self.diag, None, opts)?.x;
                r.iter_mut().for_each(|x| *x = x.max(0.0));
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Field::from_components(comps))
    }
}

fn residual_load<const D: usize, L: ConservationLaw<D>>(
    space: &LagrangeSpace<D>,
    law: &L,
    u: &Field,
    dtu: &Field,
) -> Field {
    let nc = law.ncomp();
    let nloc = space.nloc();
    let rule = space.quadrature();
    let locals: Vec<Vec<f64>> = (0..space.num_cells())
        .into_par_iter()
        .map(|c| {
            let dofs = space.cell_dofs(c);
            let mut loc = vec![0.0; nc * nloc];
            let mut g = vec![[0.0; D]; nloc];
            let mut state = vec![0.0; nc];
            let mut grad = vec![[0.0; D]; nc];
            let mut dual = vec![Dual::default(); nc];
            let mut fl = vec![[Dual::default(); D]; nc];
            let mut res = vec![0.0; nc];
            for q in 0..rule.len() {
                let v = space.values(q);
                space.gradients(c, q, &mut g);
                for k in 0..nc {
                    let (mut s, mut dt) = (0.0, 0.0);
                    let mut gr = [0.0; D];
                    for n in 0..nloc {
                        let x = u.get(k, dofs[n]);
                        s += x * v[n];
                        dt += dtu.get(k, dofs[n]) * v[n];
                        for a in 0..D {
                            gr[a] += x * g[n][a];
                        }
                    }
                    state[k] = s;
                    grad[k] = gr;
                    res[k] = dt;
                }
                // div F = Σ_a F_a'(U) ∂_a U by forward differentiation
                for a in 0..D {
                    for k in 0..nc {
                        dual[k] = Dual::new(state[k], grad[k][a]);
                    }
                    law.flux(&dual, &mut fl);
                    for k in 0..nc {
                        res[k] += fl[k][a].du;
                    }
                }
                let w = rule.weights[q] * space.measure(c);
                for k in 0..nc {
                    let r = res[k].abs() * w;
                    for n in 0..nloc {
                        loc[k * nloc + n] += r * v[n];
                    }
                }
            }
            loc
        })
        .collect();
    let mut out = Field::zeros(nc, space.ndof());
    for (c, loc) in locals.iter().enumerate() {
        let dofs = space.cell_dofs(c);
        for k in 0..nc {
            let comp = out.comp_mut(k);
            for n in 0..nloc {
                comp[dofs[n]] += loc[k * nloc + n];
            }
        }
    }
    out
}

/// Smoothness indicator θ_i: range of `x` over the patch of `i` divided by the
/// global range; zero when the global range is below `1e-14 ‖x‖∞`.
pub fn smoothness_indicator(x: &[f64], patch: &PatchTable) -> Vec<f64> {
    let (lo, hi) = min_max(x);
    let range = hi - lo;
    let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(range >= 1e-14 * norm) || range == 0.0 {
        return vec![0.0; x.len()];
    }
    (0..x.len())
        .map(|i| {
            let (a, b) = min_max(patch.neighbors(i).iter().map(|&j| x[j]));
            (b - a) / range
        })
        .collect()
}

/// Ψ_i = ¼ ‖x − x̄‖∞ (1 − θ_i) + 10⁻⁸ ‖x‖∞ with x̄ the mass-weighted mean.
pub fn normalization(x: &[f64], lumped: &[f64], patch: &PatchTable) -> Vec<f64> {
    let volume: f64 = lumped.iter().sum();
    let mean = x.iter().zip(lumped).map(|(a, m)| a * m).sum::<f64>() / volume;
    let dev = x.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    smoothness_indicator(x, patch)
        .into_iter()
        .map(|theta| 0.25 * dev * (1.0 - theta) + 1e-8 * norm)
        .collect()
}

fn min_max(it: impl IntoIterator<Item = impl std::borrow::Borrow<f64>>) -> (f64, f64) {
    it.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        let v = *v.borrow();
        (a.min(v), b.max(v))
    })
}

/// max over indicator groups of `|R_x,i| / Ψ_i(x)`; vector groups use the
/// nodal Euclidean norm of the residual and Ψ of the magnitude field.
pub fn scaled_residual<const D: usize, L: ConservationLaw<D>>(
    law: &L,
    residual: &Field,
    u: &Field,
    geometry: &NodalGeometry,
) -> Vec<f64> {
    let n = u.ndof();
    let mut out = vec![0.0f64; n];
    for group in law.indicator_groups() {
        let magnitude = |f: &Field, i: usize| group.iter().map(|&c| f.get(c, i).powi(2)).sum::<f64>().sqrt();
        let x: Vec<f64> = if group.len() == 1 {
            u.comp(group[0]).to_vec()
        } else {
            (0..n).map(|i| magnitude(u, i)).collect()
        };
        let psi = normalization(&x, &geometry.lumped, &geometry.coarse_patch);
        for i in 0..n {
            let r = magnitude(residual, i);
            let ratio = if psi[i] > 0.0 {
                r / psi[i]
            } else if r > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            out[i] = out[i].max(ratio);
        }
    }
    out
}

/// ε^RV_i = C_i min(λ_max,i Φ_i, s_i) m_i^fine with `s` the scaled residual.
pub fn residual_viscosity(scaled: &[f64], lambda: &[f64], geometry: &NodalGeometry) -> Vec<f64> {
    (0..scaled.len())
        .map(|i| {
            let cap = lambda[i] * geometry.phi[i];
            geometry.c[i] * cap.min(scaled[i]) * geometry.lumped_fine[i]
        })
        .collect()
}
