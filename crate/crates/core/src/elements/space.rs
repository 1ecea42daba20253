use std::collections::HashMap;

use rayon::prelude::*;

use super::{LagrangeBasis, SimplexQuadrature};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::affine::{self, Mat};
use crate::mesh::{lattice::fine_from_lattice, LatticeNumbering, Mesh};

/// Boundary facet of the coarse mesh with its adjacent cell.
#[derive(Debug, Clone)]
pub struct BoundaryFacet<const D: usize> {
    pub facet: usize,
    pub cell: usize,
    pub tag: u32,
    pub periodic: bool,
    pub normal: [f64; D],
    pub measure: f64,
    /// Quadrature points as barycentric coordinates of `cell`.
    pub bary: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Basis values and barycentric derivatives tabulated on a quadrature rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub rule: SimplexQuadrature,
    /// `values[q * nloc + n]`.
    pub values: Vec<f64>,
    /// `bary_derivs[(q * nloc + n) * (d + 1) + m]`.
    pub bary_derivs: Vec<f64>,
}

/// Continuous degree-`k` Lagrange space on a simplex mesh.
///
/// Nodes are the principal-lattice points of every cell; periodic images share
/// one degree of freedom. The geometry of every cell is taken from its own
/// vertices, so periodicity only affects the dof map.
#[derive(Debug, Clone)]
pub struct LagrangeSpace<const D: usize> {
    mesh: Mesh<D>,
    fine: Mesh<D>,
    degree: usize,
    basis: LagrangeBasis,
    nodes: Vec<[f64; D]>,
    node_dof: Vec<usize>,
    dof_node: Vec<usize>,
    cell_dofs: Vec<usize>,
    nloc: usize,
    measures: Vec<f64>,
    /// `D + 1` barycentric gradients per cell.
    bary_grads: Vec<[f64; D]>,
    jjt: Vec<Mat<D>>,
    tab: Tabulation,
    boundary: Vec<BoundaryFacet<D>>,
    pattern: CsrMatrix,
}

impl<const D: usize> LagrangeSpace<D> {
    pub fn new(mesh: &Mesh<D>, degree: usize) -> Result<Self> {
        Self::with_quadrature(mesh, degree, 2 * degree + 1)
    }

    pub fn with_quadrature(mesh: &Mesh<D>, degree: usize, quad_degree: usize) -> Result<Self> {
        let lattice = LatticeNumbering::new(mesh, degree)?;
        let fine = fine_from_lattice(mesh, &lattice)?;
        let basis = LagrangeBasis::new(D, degree);
        let nloc = basis.len();

        let mut compact = vec![usize::MAX; lattice.num_nodes()];
        let mut dof_node = Vec::new();
        for n in 0..lattice.num_nodes() {
            let r = fine.representative(n);
            if compact[r] == usize::MAX {
                compact[r] = dof_node.len();
                dof_node.push(r);
            }
        }
        let node_dof: Vec<usize> = (0..lattice.num_nodes()).map(|n| compact[fine.representative(n)]).collect();
        let cell_dofs: Vec<usize> = lattice.cell_nodes.iter().map(|&n| node_dof[n]).collect();

        let ncell = mesh.num_cells();
        let mut measures = Vec::with_capacity(ncell);
        let mut bary_grads = Vec::with_capacity(ncell * (D + 1));
        let mut jjt = Vec::with_capacity(ncell);
        for c in 0..ncell {
            measures.push(mesh.measure(c));
            let g = affine::edge_matrix(&mesh.cell_coords(c));
            let ginv = affine::inverse(&g);
            let mut g0 = [0.0; D];
            for m in 0..D {
                for r in 0..D {
                    g0[r] -= ginv[m][r];
                }
            }
            bary_grads.push(g0);
            for m in 0..D {
                bary_grads.push(ginv[m]);
            }
            let j = mesh.equilateral_jacobian(c)?;
            jjt.push(affine::mul(&j, &affine::transpose(&j)));
        }

        let tab = tabulate(&basis, SimplexQuadrature::new(D, quad_degree));
        let boundary = boundary_facets(mesh, quad_degree)?;
        let pattern = CsrMatrix::from_cell_pattern(dof_node.len(), &cell_dofs, nloc);
        Ok(Self {
            mesh: mesh.clone(),
            fine,
            degree,
            basis,
            nodes: lattice.nodes,
            node_dof,
            dof_node,
            cell_dofs,
            nloc,
            measures,
            bary_grads,
            jjt,
            tab,
            boundary,
            pattern,
        })
    }

    pub fn mesh(&self) -> &Mesh<D> {
        &self.mesh
    }

    /// Fine P1 submesh whose vertices are this space's nodes.
    pub fn fine_mesh(&self) -> &Mesh<D> {
        &self.fine
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn ndof(&self) -> usize {
        self.dof_node.len()
    }

    pub fn num_cells(&self) -> usize {
        self.measures.len()
    }

    pub fn nloc(&self) -> usize {
        self.nloc
    }

    /// Lattice node coordinates (periodic images listed separately).
    pub fn nodes(&self) -> &[[f64; D]] {
        &self.nodes
    }

    pub fn node_dof(&self, node: usize) -> usize {
        self.node_dof[node]
    }

    /// Coordinates of the representative node of a dof.
    pub fn dof_coord(&self, dof: usize) -> [f64; D] {
        self.nodes[self.dof_node[dof]]
    }

    pub fn dof_coords(&self) -> Vec<[f64; D]> {
        (0..self.ndof()).map(|i| self.dof_coord(i)).collect()
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c * self.nloc..(c + 1) * self.nloc]
    }

    pub fn all_cell_dofs(&self) -> &[usize] {
        &self.cell_dofs
    }

    pub fn measure(&self, c: usize) -> f64 {
        self.measures[c]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// `J_K J_Kᵀ` of the equilateral-reference map.
    pub fn jjt(&self, c: usize) -> &Mat<D> {
        &self.jjt[c]
    }

    pub fn bary_gradients(&self, c: usize) -> &[[f64; D]] {
        &self.bary_grads[c * (D + 1)..(c + 1) * (D + 1)]
    }

    pub fn tabulation(&self) -> &Tabulation {
        &self.tab
    }

    pub fn quadrature(&self) -> &SimplexQuadrature {
        &self.tab.rule
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet<D>] {
        &self.boundary
    }

    /// Zero matrix with this space's sparsity.
    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    pub fn tabulate(&self, rule: SimplexQuadrature) -> Tabulation {
        tabulate(&self.basis, rule)
    }

    /// Physical basis gradients at point `q` of a tabulation.
    pub fn gradients_with(&self, tab: &Tabulation, c: usize, q: usize, out: &mut [[f64; D]]) {
        let bg = self.bary_gradients(c);
        let nb = D + 1;
        for n in 0..self.nloc {
            let d = &tab.bary_derivs[(q * self.nloc + n) * nb..(q * self.nloc + n + 1) * nb];
            let mut g = [0.0; D];
            for m in 0..nb {
                for r in 0..D {
                    g[r] += d[m] * bg[m][r];
                }
            }
            out[n] = g;
        }
    }

    pub fn gradients(&self, c: usize, q: usize, out: &mut [[f64; D]]) {
        self.gradients_with(&self.tab, c, q, out);
    }

    pub fn values(&self, q: usize) -> &[f64] {
        &self.tab.values[q * self.nloc..(q + 1) * self.nloc]
    }

    /// Basis values and physical gradients at an arbitrary barycentric point.
    pub fn eval_at(&self, c: usize, bary: &[f64], values: &mut [f64], grads: &mut [[f64; D]]) {
        self.basis.values(bary, values);
        let nb = D + 1;
        let mut d = vec![0.0; self.nloc * nb];
        self.basis.bary_derivatives(bary, &mut d);
        let bg = self.bary_gradients(c);
        for n in 0..self.nloc {
            let mut g = [0.0; D];
            for m in 0..nb {
                for r in 0..D {
                    g[r] += d[n * nb + m] * bg[m][r];
                }
            }
            grads[n] = g;
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn([f64; D]) -> f64 + Sync) -> Vec<f64> {
        (0..self.ndof()).into_par_iter().map(|i| f(self.dof_coord(i))).collect()
    }

    /// `∫ φ_i dx`.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.ndof()];
        for c in 0..self.num_cells() {
            let dofs = self.cell_dofs(c);
            for (q, w) in self.tab.rule.weights.iter().enumerate() {
                let v = self.values(q);
                for n in 0..self.nloc {
                    m[dofs[n]] += w * self.measures[c] * v[n];
                }
            }
        }
        m
    }

    /// `a (φ_j, φ_i) + Σ_K b_K (∇φ_j, ∇φ_i)_K`.
    pub fn mass_plus_stiffness(&self, a: f64, b: impl Fn(usize) -> f64 + Sync) -> CsrMatrix {
        let nloc = self.nloc;
        let locals: Vec<Vec<f64>> = (0..self.num_cells())
            .into_par_iter()
            .map(|c| {
                let mut loc = vec![0.0; nloc * nloc];
                let bc = b(c);
                let mut g = vec![[0.0; D]; nloc];
                for (q, w) in self.tab.rule.weights.iter().enumerate() {
                    let wq = w * self.measures[c];
                    let v = self.values(q);
                    self.gradients(c, q, &mut g);
                    for r in 0..nloc {
                        for s in 0..nloc {
                            loc[r * nloc + s] += wq * (a * v[r] * v[s] + bc * affine::dot(&g[r], &g[s]));
                        }
                    }
                }
                loc
            })
            .collect();
        let mut mat = self.pattern.clone();
        for (c, loc) in locals.iter().enumerate() {
            mat.add_local(self.cell_dofs(c), loc);
        }
        mat
    }

    pub fn consistent_mass(&self) -> CsrMatrix {
        self.mass_plus_stiffness(1.0, |_| 0.0)
    }

    pub fn stiffness(&self) -> CsrMatrix {
        self.mass_plus_stiffness(0.0, |_| 1.0)
    }

    /// Dofs on non-periodic boundary facets whose tag is in `tags`.
    pub fn boundary_dofs(&self, tags: &[u32]) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.fine.num_facets())
            .filter(|&f| tags.contains(&self.fine.facet_tag(f)) && !self.fine.facet_is_periodic(f))
            .flat_map(|f| self.fine.facet(f).iter().map(|&n| self.node_dof[n]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Unit outward normals of the non-periodic boundary facets touching each
    /// dof, restricted to `tags`. Parallel facets are merged.
    pub fn boundary_normals(&self, tags: &[u32]) -> HashMap<usize, Vec<[f64; D]>> {
        let mut out: HashMap<usize, Vec<[f64; D]>> = HashMap::new();
        for bf in self.boundary.iter().filter(|b| !b.periodic && tags.contains(&b.tag)) {
            let fv = self.mesh.facet(bf.facet);
            let lattice_dofs = self.facet_dofs(bf, fv);
            for dof in lattice_dofs {
                let list = out.entry(dof).or_default();
                if !list.iter().any(|n| affine::dot(n, &bf.normal) > 1.0 - 1e-10) {
                    list.push(bf.normal);
                }
            }
        }
        out
    }

    fn facet_dofs(&self, bf: &BoundaryFacet<D>, facet_verts: &[usize]) -> Vec<usize> {
        let cell = self.mesh.cell(bf.cell);
        let local: Vec<usize> = facet_verts
            .iter()
            .map(|v| cell.iter().position(|w| w == v).expect("facet vertex in cell"))
            .collect();
        let opposite = (0..=D).find(|m| !local.contains(m)).expect("opposite vertex");
        self.basis
            .alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| a[opposite] == 0)
            .map(|(n, _)| self.cell_dofs(bf.cell)[n])
            .collect()
    }

    /// Evaluates a nodal field at barycentric point `bary` of cell `c`.
    pub fn eval_field(&self, field: &[f64], c: usize, bary: &[f64]) -> f64 {
        let mut v = vec![0.0; self.nloc];
        self.basis.values(bary, &mut v);
        self.cell_dofs(c).iter().zip(&v).map(|(&i, w)| field[i] * w).sum()
    }
}

fn tabulate(basis: &LagrangeBasis, rule: SimplexQuadrature) -> Tabulation {
    let nloc = basis.len();
    let nb = basis.dim + 1;
    let mut values = vec![0.0; rule.len() * nloc];
    let mut bary_derivs = vec![0.0; rule.len() * nloc * nb];
    for q in 0..rule.len() {
        basis.values(&rule.bary[q], &mut values[q * nloc..(q + 1) * nloc]);
        basis.bary_derivatives(&rule.bary[q], &mut bary_derivs[q * nloc * nb..(q + 1) * nloc * nb]);
    }
    Tabulation {
        rule,
        values,
        bary_derivs,
    }
}

fn boundary_facets<const D: usize>(mesh: &Mesh<D>, quad_degree: usize) -> Result<Vec<BoundaryFacet<D>>> {
    let mut owner: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        for opp in 0..=D {
            let mut key: Vec<usize> = (0..=D).filter(|&m| m != opp).map(|m| cell[m]).collect();
            key.sort_unstable();
            owner.insert(key, (c, opp));
        }
    }
    let rule = SimplexQuadrature::new(D - 1, quad_degree);
    let mut out = Vec::with_capacity(mesh.num_facets());
    for f in 0..mesh.num_facets() {
        let fv = mesh.facet(f);
        let mut key = fv.to_vec();
        key.sort_unstable();
        let &(cell, opp) = owner
            .get(&key)
            .ok_or_else(|| Error::NonConforming(format!("boundary facet {f} has no cell")))?;
        let verts: Vec<[f64; D]> = fv.iter().map(|&v| mesh.vertex(v)).collect();
        let inside = mesh.vertex(mesh.cell(cell)[opp]);
        let (mut normal, measure) = match D {
            1 => ([1.0; D], 1.0),
            2 => {
                let t = [verts[1][0] - verts[0][0], verts[1][1] - verts[0][1]];
                let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
                let mut n = [0.0; D];
                n[0] = t[1] / len;
                n[1] = -t[0] / len;
                (n, len)
            }
            _ => unimplemented!("facets in dimension {D}"),
        };
        let to_inside: [f64; D] = std::array::from_fn(|r| inside[r] - verts[0][r]);
        if affine::dot(&normal, &to_inside) > 0.0 {
            normal.iter_mut().for_each(|x| *x = -*x);
        }
        let cell_verts = mesh.cell(cell);
        let bary = rule
            .bary
            .iter()
            .map(|fb| {
                let mut b = vec![0.0; D + 1];
                for (l, &v) in fv.iter().enumerate() {
                    let m = cell_verts.iter().position(|&w| w == v).expect("facet vertex in cell");
                    b[m] = fb[l];
                }
                b
            })
            .collect();
        out.push(BoundaryFacet {
            facet: f,
            cell,
            tag: mesh.facet_tag(f),
            periodic: mesh.facet_is_periodic(f),
            normal,
            measure,
            bary,
            weights: rule.weights.clone(),
        });
    }
    Ok(out)
}
