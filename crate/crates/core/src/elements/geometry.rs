use super::LagrangeSpace;
use crate::error::{Error, Result};
use crate::mesh::affine;
use crate::mesh::PatchTable;

/// Per-node geometric factors that enter the nodal viscosity.
#[derive(Debug, Clone)]
pub struct NodalGeometry {
    pub dim: usize,
    /// Lumped mass of the degree-k space.
    pub lumped: Vec<f64>,
    /// Lumped mass of the fine P1 space.
    pub lumped_fine: Vec<f64>,
    /// Patch indicator Φ_i on the fine P1 space.
    pub phi: Vec<f64>,
    /// Viscosity constant C_i on the fine submesh.
    pub c: Vec<f64>,
    /// Mesh quality κ_i on the fine submesh.
    pub kappa: Vec<f64>,
    /// Patches of the fine P1 submesh.
    pub fine_patch: PatchTable,
    /// Patches of the degree-k cells.
    pub coarse_patch: PatchTable,
}

impl NodalGeometry {
    pub fn new<const D: usize>(space: &LagrangeSpace<D>) -> Result<Self> {
        let fine_space = LagrangeSpace::new(space.fine_mesh(), 1)?;
        if fine_space.ndof() != space.ndof() {
            return Err(Error::InvalidState(format!(
                "fine space has {} dofs, coarse space {}",
                fine_space.ndof(),
                space.ndof()
            )));
        }
        let fine_patch = PatchTable::new(fine_space.ndof(), fine_space.all_cell_dofs(), D + 1, fine_space.measures());
        let coarse_patch = PatchTable::new(space.ndof(), space.all_cell_dofs(), space.nloc(), space.measures());
        let phi = patch_indicator(&fine_space, &fine_patch)?;
        let c = viscosity_constant(&fine_patch, D)?;
        let kappa = (0..fine_patch.num_nodes())
            .map(|i| fine_patch.mesh_quality(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: D,
            lumped: space.lumped_mass(),
            lumped_fine: fine_space.lumped_mass(),
            phi,
            c,
            kappa,
            fine_patch,
            coarse_patch,
        })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// `C_i m_i^fine Φ_i`, the factor multiplying λ_max,i in ε^L_i.
    pub fn scale(&self, i: usize) -> f64 {
        self.c[i] * self.lumped_fine[i] * self.phi[i]
    }
}

/// Φ_i = max over fine cells K ∋ i and dofs j ≠ i of K of |∇φ_j|_K.
///
/// On periodic strips one row thick a cell can carry two local copies of a
/// dof; their gradients are summed since they belong to one basis function.
pub fn patch_indicator<const D: usize>(fine_space: &LagrangeSpace<D>, patch: &PatchTable) -> Result<Vec<f64>> {
    if fine_space.degree() != 1 {
        return Err(Error::UnsupportedDegree(fine_space.degree()));
    }
    let n = fine_space.ndof();
    let mut phi = vec![0.0f64; n];
    for c in 0..fine_space.num_cells() {
        let dofs = fine_space.cell_dofs(c);
        let bg = fine_space.bary_gradients(c);
        let mut agg: Vec<(usize, [f64; D])> = Vec::with_capacity(D + 1);
        for (l, &j) in dofs.iter().enumerate() {
            match agg.iter_mut().find(|(d, _)| *d == j) {
                Some((_, g)) => (0..D).for_each(|r| g[r] += bg[l][r]),
                None => agg.push((j, bg[l])),
            }
        }
        for (i, _) in &agg {
            for (j, g) in &agg {
                if i != j {
                    phi[*i] = phi[*i].max(affine::norm(g));
                }
            }
        }
    }
    for (i, p) in phi.iter().enumerate() {
        if patch.nel(i) == 0 || !(*p > 0.0) {
            return Err(Error::EmptyPatch(i));
        }
    }
    Ok(phi)
}

/// `C_i = ((d+1)/2) · (1/Nel(S_i)) · max_{K∈S_i} |K|⁻¹` on the fine submesh.
///
/// The maximum of the inverse measure is `1 / min |K|`.
pub fn viscosity_constant(patch: &PatchTable, dim: usize) -> Result<Vec<f64>> {
    (0..patch.num_nodes())
        .map(|i| {
            let kmin = patch.min_measure(i)?;
            Ok((dim as f64 + 1.0) / 2.0 / patch.nel(i) as f64 / kmin)
        })
        .collect()
}

/// `∫_K (J_Kᵀ∇φ_j)·(J_Kᵀ∇φ_i) dx` for all local P1 pairs, row-major.
pub fn reference_stencil<const D: usize>(space: &LagrangeSpace<D>, c: usize) -> Result<Vec<f64>> {
    if space.degree() != 1 {
        return Err(Error::UnsupportedDegree(space.degree()));
    }
    let j = space.mesh().equilateral_jacobian(c)?;
    let jt = affine::transpose(&j);
    let g: Vec<[f64; D]> = space.bary_gradients(c).iter().map(|g| affine::mat_vec(&jt, g)).collect();
    let k = space.measure(c);
    let n = D + 1;
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = k * affine::dot(&g[a], &g[b]);
        }
    }
    Ok(out)
}
