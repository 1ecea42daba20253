use super::{Mesh, PointLocator};
use crate::error::{Error, Result};

/// Barycentric multi-indices of the principal lattice of degree `k` on a
/// `d`-simplex, in the local node order shared by the Lagrange basis.
///
/// 1D: `i = 0..=k` gives `(k - i, i)`. 2D: `j = 0..=k`, `i = 0..=k - j` gives
/// `(k - i - j, i, j)`. The first `d + 1` entries are the simplex vertices.
pub fn lattice_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let raw: Vec<Vec<usize>> = match d {
        1 => (0..=k).map(|i| vec![k - i, i]).collect(),
        2 => {
            let mut v = Vec::new();
            for j in 0..=k {
                for i in 0..=k - j {
                    v.push(vec![k - i - j, i, j]);
                }
            }
            v
        }
        _ => unimplemented!("lattice in dimension {d}"),
    };
    // vertices first, then the remaining nodes in lattice order
    let mut out: Vec<Vec<usize>> = (0..=d)
        .map(|m| (0..=d).map(|l| if l == m { k } else { 0 }).collect())
        .collect();
    out.extend(raw.into_iter().filter(|a| !a.contains(&k)));
    out
}

/// Principal-lattice split of the reference simplex into `k^d` sub-simplices,
/// as local node indices into [`lattice_indices`].
pub fn sub_simplices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let nodes = lattice_indices(d, k);
    let find = |a: &[usize]| nodes.iter().position(|n| n.as_slice() == a).expect("lattice node");
    match d {
        1 => (0..k).map(|i| vec![find(&[k - i, i]), find(&[k - i - 1, i + 1])]).collect(),
        2 => {
            let at = |i: usize, j: usize| find(&[k - i - j, i, j]);
            let mut out = Vec::new();
            for j in 0..k {
                for i in 0..k - j {
                    out.push(vec![at(i, j), at(i + 1, j), at(i, j + 1)]);
                    if i + j + 2 <= k {
                        out.push(vec![at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
                    }
                }
            }
            out
        }
        _ => unimplemented!("sub-simplices in dimension {d}"),
    }
}

/// Global numbering of the degree-`k` Lagrange nodes of a mesh.
///
/// Mesh vertices keep their indices; the remaining lattice nodes are numbered
/// in order of first appearance, with coincident nodes merged geometrically.
#[derive(Debug, Clone)]
pub struct LatticeNumbering<const D: usize> {
    pub degree: usize,
    pub nodes: Vec<[f64; D]>,
    /// `nloc` global node ids per cell in local lattice order.
    pub cell_nodes: Vec<usize>,
    pub nloc: usize,
}

impl<const D: usize> LatticeNumbering<D> {
    pub fn new(mesh: &Mesh<D>, k: usize) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::UnsupportedDegree(k));
        }
        let local = lattice_indices(D, k);
        let nloc = local.len();
        let mut locator = PointLocator::new(1e-10 * mesh.diameter());
        for v in mesh.vertices() {
            let (_, fresh) = locator.insert(*v);
            if !fresh {
                return Err(Error::NonConforming("coincident mesh vertices".into()));
            }
        }
        let mut cell_nodes = Vec::with_capacity(mesh.num_cells() * nloc);
        for c in 0..mesh.num_cells() {
            let cell = mesh.cell(c);
            let verts = mesh.cell_coords(c);
            for (l, alpha) in local.iter().enumerate() {
                if l <= D {
                    cell_nodes.push(cell[l]);
                    continue;
                }
                let x = lattice_point(&verts, alpha, k);
                cell_nodes.push(locator.insert(x).0);
            }
        }
        Ok(Self {
            degree: k,
            nodes: locator.into_points(),
            cell_nodes,
            nloc,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cell_nodes[c * self.nloc..(c + 1) * self.nloc]
    }
}

pub(crate) fn lattice_point<const D: usize>(verts: &[[f64; D]], alpha: &[usize], k: usize) -> [f64; D] {
    let mut x = [0.0; D];
    for (m, v) in verts.iter().enumerate() {
        let w = alpha[m] as f64 / k as f64;
        for r in 0..D {
            x[r] += w * v[r];
        }
    }
    x
}

/// Fine P1 submesh whose vertices are the degree-`k` Lagrange nodes.
///
/// Fine cell `c * k^d + s` is sub-simplex `s` of coarse cell `c`. Boundary tags
/// and periodicity carry over to the fine facets and nodes.
pub fn build_fine_submesh<const D: usize>(mesh: &Mesh<D>, k: usize) -> Result<Mesh<D>> {
    let lattice = LatticeNumbering::new(mesh, k)?;
    fine_from_lattice(mesh, &lattice)
}

pub(crate) fn fine_from_lattice<const D: usize>(mesh: &Mesh<D>, lattice: &LatticeNumbering<D>) -> Result<Mesh<D>> {
    let k = lattice.degree;
    if k == 1 {
        return Ok(mesh.clone());
    }
    let subs = sub_simplices(D, k);
    let mut cells = Vec::with_capacity(mesh.num_cells() * subs.len() * (D + 1));
    for c in 0..mesh.num_cells() {
        let ids = lattice.cell(c);
        for s in &subs {
            cells.extend(s.iter().map(|&l| ids[l]));
        }
    }
    let mut locator = PointLocator::new(1e-10 * mesh.diameter());
    for p in &lattice.nodes {
        locator.insert(*p);
    }
    let mut facets = Vec::new();
    let mut tags = Vec::new();
    for f in 0..mesh.num_facets() {
        let fv = mesh.facet(f);
        match D {
            1 => {
                facets.push(fv[0]);
                tags.push(mesh.facet_tag(f));
            }
            2 => {
                let (a, b) = (mesh.vertex(fv[0]), mesh.vertex(fv[1]));
                let point = |s: usize| -> Result<usize> {
                    let t = s as f64 / k as f64;
                    let x: [f64; D] = std::array::from_fn(|r| (1.0 - t) * a[r] + t * b[r]);
                    locator
                        .find(&x)
                        .ok_or_else(|| Error::NonConforming(format!("boundary facet {f} has no lattice nodes")))
                };
                for s in 0..k {
                    facets.push(point(s)?);
                    facets.push(point(s + 1)?);
                    tags.push(mesh.facet_tag(f));
                }
            }
            _ => unimplemented!("fine submesh in dimension {D}"),
        }
    }
    let fine = Mesh::new(lattice.nodes.clone(), cells, facets, tags)?;
    if mesh.is_periodic() {
        fine.with_periodicity(mesh.periods())
    } else {
        Ok(fine)
    }
}
