use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::elements::LagrangeSpace;
use crate::field::Field;
use crate::mesh::affine;

pub type StateFn<const D: usize> = Arc<dyn Fn([f64; D], f64) -> Vec<f64> + Send + Sync>;

/// Strongly imposed boundary condition on tagged facets. Periodic boundaries
/// are handled by the mesh's dof identification.
#[derive(Clone)]
pub enum BoundaryCondition<const D: usize> {
    /// Overwrite all components with `data(x, t)`.
    Dirichlet { tags: Vec<u32>, data: StateFn<D> },
    /// Remove the normal momentum; at corners with two normals the momentum
    /// is set to zero.
    Slip { tags: Vec<u32> },
}

impl<const D: usize> fmt::Debug for BoundaryCondition<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dirichlet { tags, .. } => f.debug_struct("Dirichlet").field("tags", tags).finish(),
            Self::Slip { tags } => f.debug_struct("Slip").field("tags", tags).finish(),
        }
    }
}

/// Boundary conditions resolved to dofs.
#[derive(Clone, Default)]
pub(crate) struct ResolvedBcs<const D: usize> {
    dirichlet: Vec<(Vec<usize>, StateFn<D>)>,
    slip: HashMap<usize, Vec<[f64; D]>>,
}

impl<const D: usize> ResolvedBcs<D> {
    pub fn new(space: &LagrangeSpace<D>, bcs: &[BoundaryCondition<D>]) -> Self {
        let mut out = Self {
            dirichlet: Vec::new(),
            slip: HashMap::new(),
        };
        for bc in bcs {
            match bc {
                BoundaryCondition::Dirichlet { tags, data } => {
                    out.dirichlet.push((space.boundary_dofs(tags), data.clone()));
                }
                BoundaryCondition::Slip { tags } => {
                    for (dof, normals) in space.boundary_normals(tags) {
                        let list = out.slip.entry(dof).or_default();
                        for n in normals {
                            if !list.iter().any(|m| affine::dot(m, &n) > 1.0 - 1e-10) {
                                list.push(n);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn dirichlet_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.dirichlet.iter().flat_map(|(d, _)| d.iter().copied())
    }

    pub fn apply(&self, space: &LagrangeSpace<D>, u: &mut Field, t: f64, momentum: Option<[usize; D]>) {
        if let Some(mc) = momentum {
            for (&dof, normals) in &self.slip {
                let mut m: [f64; D] = std::array::from_fn(|a| u.get(mc[a], dof));
                if normals.len() == 1 {
                    let mn = affine::dot(&m, &normals[0]);
                    for a in 0..D {
                        m[a] -= mn * normals[0][a];
                    }
                } else {
                    m = [0.0; D];
                }
                for a in 0..D {
                    u.set(mc[a], dof, m[a]);
                }
            }
        }
        for (dofs, data) in &self.dirichlet {
            for &i in dofs {
                u.set_node(i, &data(space.dof_coord(i), t));
            }
        }
    }
}
