use rayon::prelude::*;

use crate::elements::LagrangeSpace;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh::affine;
use crate::physics::ConservationLaw;

/// Semi-discrete right-hand side, per component and node:
///
/// `F_i = (F(U_h), ∇φ_i) − ∮ F(U_h)·n φ_i − Σ_K ∫_K ε_h (J_K J_Kᵀ ∇U_h)·∇φ_i`.
///
/// The first two terms equal `−(div F(U_h), φ_i)`; the boundary integral
/// runs over non-periodic facets only, which makes the sum over nodes vanish
/// exactly on periodic domains. `ε_h` is the degree-k interpolant of the nodal
/// viscosity. Cells are processed in parallel and scattered in cell order.
pub fn assemble_rhs<const D: usize, L: ConservationLaw<D>>(
    space: &LagrangeSpace<D>,
    law: &L,
    u: &Field,
    eps: &[f64],
) -> Result<Field> {
    let nc = law.ncomp();
    let nloc = space.nloc();
    let rule = space.quadrature();
    let locals: Vec<Vec<f64>> = (0..space.num_cells())
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let dofs = space.cell_dofs(c);
            let jjt = space.jjt(c);
            let mut loc = vec![0.0; nc * nloc];
            let mut g = vec![[0.0; D]; nloc];
            let mut state = vec![0.0; nc];
            let mut grad = vec![[0.0; D]; nc];
            let mut fl = vec![[0.0; D]; nc];
            let eps_loc: Vec<f64> = dofs.iter().map(|&i| eps[i]).collect();
            let any_eps = eps_loc.iter().any(|&e| e != 0.0);
            for q in 0..rule.len() {
                let v = space.values(q);
                space.gradients(c, q, &mut g);
                for k in 0..nc {
                    let mut s = 0.0;
                    let mut gr = [0.0; D];
                    for n in 0..nloc {
                        let x = u.get(k, dofs[n]);
                        s += x * v[n];
                        for a in 0..D {
                            gr[a] += x * g[n][a];
                        }
                    }
                    state[k] = s;
                    grad[k] = gr;
                }
                law.check_state(&state)
                    .map_err(|e| Error::InvalidState(format!("cell {c}, quadrature point {q}: {e}")))?;
                law.flux(&state, &mut fl);
                let w = rule.weights[q] * space.measure(c);
                let eq: f64 = eps_loc.iter().zip(v).map(|(e, p)| e * p).sum();
                for k in 0..nc {
                    let mut total = fl[k];
                    if any_eps {
                        let visc = affine::mat_vec(jjt, &grad[k]);
                        for a in 0..D {
                            total[a] -= eq * visc[a];
                        }
                    }
                    for n in 0..nloc {
                        loc[k * nloc + n] += w * affine::dot(&total, &g[n]);
                    }
                }
            }
            Ok(loc)
        })
        .collect::<Result<_>>()?;

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

    let mut values = vec![0.0; nloc];
    let mut grads = vec![[0.0; D]; nloc];
    let mut state = vec![0.0; nc];
    let mut fl = vec![[0.0; D]; nc];
    for bf in space.boundary_facets().iter().filter(|b| !b.periodic) {
        let dofs = space.cell_dofs(bf.cell);
        for (bary, w) in bf.bary.iter().zip(&bf.weights) {
            space.eval_at(bf.cell, bary, &mut values, &mut grads);
            for k in 0..nc {
                state[k] = dofs.iter().zip(&values).map(|(&i, p)| u.get(k, i) * p).sum();
            }
            law.check_state(&state)
                .map_err(|e| Error::InvalidState(format!("boundary facet {} of cell {}: {e}", bf.facet, bf.cell)))?;
            law.flux(&state, &mut fl);
            for k in 0..nc {
                let fn_ = affine::dot(&fl[k], &bf.normal) * w * bf.measure;
                let comp = out.comp_mut(k);
                for n in 0..nloc {
                    comp[dofs[n]] -= fn_ * values[n];
                }
            }
        }
    }
    Ok(out)
}
