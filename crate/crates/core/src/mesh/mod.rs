//! Conforming simplex meshes in one and two space dimensions.
//!
//! A [`Mesh`] stores vertex coordinates, cells as `D + 1` vertex indices, and
//! tagged boundary facets. Periodic boundaries are expressed as a vertex
//! identification map; the geometry itself is never wrapped, so every cell keeps
//! its own vertex coordinates and only the degrees of freedom are shared.

pub mod affine;
mod generate;
mod io;
pub(crate) mod lattice;
mod locator;
mod patch;

pub use generate::{interval, perturbed_interval, perturbed_rectangle, rectangle, BoxTags};
pub use io::{read_mesh, write_mesh};
pub use lattice::{build_fine_submesh, lattice_indices, sub_simplices, LatticeNumbering};
pub use locator::PointLocator;
pub use patch::PatchTable;

use std::collections::HashMap;

use crate::error::{Error, Result};
use affine::Mat;

#[derive(Debug, Clone)]
pub struct Mesh<const D: usize> {
    vertices: Vec<[f64; D]>,
    cells: Vec<usize>,
    facets: Vec<usize>,
    facet_tags: Vec<u32>,
    periods: [Option<f64>; D],
    identify: Vec<usize>,
    bbox: ([f64; D], [f64; D]),
}

impl<const D: usize> Mesh<D> {
    /// Builds and validates a mesh. `cells` holds `D + 1` vertex indices per
    /// simplex and `facets` holds `D` vertex indices per tagged boundary facet.
    pub fn new(
        vertices: Vec<[f64; D]>,
        cells: Vec<usize>,
        facets: Vec<usize>,
        facet_tags: Vec<u32>,
    ) -> Result<Self> {
        if cells.len() % (D + 1) != 0 || facets.len() != D * facet_tags.len() {
            return Err(Error::NonConforming("connectivity length mismatch".into()));
        }
        if let Some(&v) = cells.iter().chain(&facets).find(|&&v| v >= vertices.len()) {
            return Err(Error::NonConforming(format!("vertex index {v} out of range")));
        }
        let identify = (0..vertices.len()).collect();
        let bbox = bounding_box(&vertices);
        let mesh = Self {
            vertices,
            cells,
            facets,
            facet_tags,
            periods: [None; D],
            identify,
            bbox,
        };
        for c in 0..mesh.num_cells() {
            let m = mesh.measure(c);
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::DegenerateCell { cell: c, measure: m });
            }
        }
        mesh.check_conforming()?;
        Ok(mesh)
    }

    fn check_conforming(&self) -> Result<()> {
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        for c in 0..self.num_cells() {
            let cell = self.cell(c);
            for skip in 0..=D {
                let mut f: Vec<usize> = (0..=D).filter(|&k| k != skip).map(|k| cell[k]).collect();
                f.sort_unstable();
                *count.entry(f).or_default() += 1;
            }
        }
        let mut tagged: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in 0..self.num_facets() {
            let mut key = self.facet(f).to_vec();
            key.sort_unstable();
            match count.get(&key) {
                Some(1) => *tagged.entry(key).or_default() += 1,
                Some(_) => {
                    return Err(Error::NonConforming(format!(
                        "boundary facet {f} is shared by interior cells"
                    )))
                }
                None => {
                    return Err(Error::NonConforming(format!(
                        "boundary facet {f} is not a facet of any cell"
                    )))
                }
            }
        }
        for (key, n) in &count {
            if *n > 2 {
                return Err(Error::NonConforming(format!("facet {key:?} shared by {n} cells")));
            }
            if *n == 1 && !tagged.contains_key(key) {
                return Err(Error::NonConforming(format!("facet {key:?} is open and untagged")));
            }
        }
        Ok(())
    }

    /// Identifies vertices on opposite faces of the bounding box along each
    /// axis that carries a period. The period must equal the box extent.
    pub fn with_periodicity(mut self, periods: [Option<f64>; D]) -> Result<Self> {
        let (lo, hi) = self.bounding_box();
        let tol = 1e-10 * self.diameter();
        let mut locator = PointLocator::new(tol);
        for v in &self.vertices {
            locator.insert(*v);
        }
        let mut identify: Vec<usize> = (0..self.vertices.len()).collect();
        for (axis, period) in periods.iter().enumerate() {
            let Some(len) = *period else { continue };
            if ((hi[axis] - lo[axis]) - len).abs() > 1e-12 * len.abs().max(1.0) {
                return Err(Error::Periodicity(format!(
                    "period {len} along axis {axis} does not match box extent {}",
                    hi[axis] - lo[axis]
                )));
            }
            for v in 0..self.vertices.len() {
                let x = self.vertices[v];
                if (x[axis] - hi[axis]).abs() <= tol {
                    let mut image = x;
                    image[axis] -= len;
                    let partner = locator.find(&image).ok_or_else(|| {
                        Error::Periodicity(format!("vertex {v} at {x:?} has no periodic image"))
                    })?;
                    identify[v] = partner;
                }
            }
        }
        // resolve chains (corners are mapped once per axis)
        for v in 0..identify.len() {
            let mut r = v;
            for _ in 0..=D {
                r = identify[r];
            }
            identify[v] = r;
        }
        self.periods = periods;
        self.identify = identify;
        self.check_periodic_pairs()?;
        Ok(self)
    }

    fn check_periodic_pairs(&self) -> Result<()> {
        let scale = self.diameter();
        for (v, &r) in self.identify.iter().enumerate() {
            if self.identify[r] != r {
                return Err(Error::Periodicity(format!("map not idempotent at vertex {v}")));
            }
            for axis in 0..D {
                let d = self.vertices[v][axis] - self.vertices[r][axis];
                let ok = match self.periods[axis] {
                    None => d.abs() <= 1e-12 * scale,
                    Some(len) => {
                        let k = (d / len).round();
                        (d - k * len).abs() <= 1e-12 * scale
                    }
                };
                if !ok {
                    return Err(Error::Periodicity(format!(
                        "vertex {v} and its image {r} differ by a non-period offset"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (D + 1)
    }

    pub fn num_facets(&self) -> usize {
        self.facet_tags.len()
    }

    pub fn vertices(&self) -> &[[f64; D]] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> [f64; D] {
        self.vertices[v]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * (D + 1)..(c + 1) * (D + 1)]
    }

    pub fn cell_coords(&self, c: usize) -> Vec<[f64; D]> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f * D..(f + 1) * D]
    }

    pub fn facet_tag(&self, f: usize) -> u32 {
        self.facet_tags[f]
    }

    pub fn periods(&self) -> [Option<f64>; D] {
        self.periods
    }

    pub fn is_periodic(&self) -> bool {
        self.periods.iter().any(Option::is_some)
    }

    /// Representative vertex under the periodic identification.
    pub fn representative(&self, v: usize) -> usize {
        self.identify[v]
    }

    /// Pairs `(v, image)` of vertices identified by periodicity.
    pub fn periodic_pairs(&self) -> Vec<(usize, usize)> {
        self.identify
            .iter()
            .enumerate()
            .filter(|(v, r)| v != *r)
            .map(|(v, &r)| (v, r))
            .collect()
    }

    /// True when the facet lies on a face of the bounding box that is closed
    /// by periodicity.
    pub fn facet_is_periodic(&self, f: usize) -> bool {
        let (lo, hi) = self.bounding_box();
        let tol = 1e-10 * self.diameter();
        (0..D).any(|axis| {
            self.periods[axis].is_some()
                && [lo[axis], hi[axis]].iter().any(|&plane| {
                    self.facet(f)
                        .iter()
                        .all(|&v| (self.vertices[v][axis] - plane).abs() <= tol)
                })
        })
    }

    /// Lebesgue measure |K| of a cell.
    pub fn measure(&self, c: usize) -> f64 {
        let g = affine::edge_matrix(&self.cell_coords(c));
        affine::det(&g).abs() / affine::factorial(D)
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.measure(c)).sum()
    }

    pub fn bounding_box(&self) -> ([f64; D], [f64; D]) {
        self.bbox
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (0..D).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// Jacobian `J_K` of the affine map from the unit-edge equilateral
    /// reference simplex onto cell `c`, with reference vertex `m` mapped to
    /// local vertex `m`.
    pub fn equilateral_jacobian(&self, c: usize) -> Result<Mat<D>> {
        let g = affine::edge_matrix(&self.cell_coords(c));
        if affine::det(&g).abs() <= 0.0 {
            return Err(Error::DegenerateCell { cell: c, measure: 0.0 });
        }
        let e = affine::edge_matrix(&affine::equilateral_vertices::<D>());
        Ok(affine::mul(&g, &affine::inverse(&e)))
    }

    /// Translation part `b` of the equilateral map `x = J x̂ + b`.
    pub fn equilateral_offset(&self, c: usize) -> [f64; D] {
        self.vertices[self.cell(c)[0]]
    }

    /// Applies `f` to every vertex coordinate (e.g. rigid motions in tests).
    pub fn map_vertices(&self, f: impl Fn([f64; D]) -> [f64; D]) -> Result<Self> {
        let vertices = self.vertices.iter().map(|&v| f(v)).collect();
        let mesh = Mesh::new(vertices, self.cells.clone(), self.facets.clone(), self.facet_tags.clone())?;
        if self.is_periodic() {
            mesh.with_periodicity(self.periods)
        } else {
            Ok(mesh)
        }
    }
}

fn bounding_box<const D: usize>(vertices: &[[f64; D]]) -> ([f64; D], [f64; D]) {
    let mut lo = [f64::INFINITY; D];
    let mut hi = [f64::NEG_INFINITY; D];
    for v in vertices {
        for k in 0..D {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn right_triangle() -> Mesh<2> {
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![0, 1, 2],
            vec![0, 1, 1, 2, 2, 0],
            vec![1, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn equilateral_reference_maps_to_identity() {
        let v = affine::equilateral_vertices::<2>();
        let mesh = Mesh::new(v, vec![0, 1, 2], vec![0, 1, 1, 2, 2, 0], vec![1, 1, 1]).unwrap();
        let j = mesh.equilateral_jacobian(0).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((j[r][c] - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn interval_jacobian_is_cell_length() {
        let mesh = interval(4, 0.0, 2.0).unwrap();
        for c in 0..4 {
            let j = mesh.equilateral_jacobian(c).unwrap();
            assert!((j[0][0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn right_triangle_jacobian_determinant() {
        let mesh = right_triangle();
        let j = mesh.equilateral_jacobian(0).unwrap();
        // |det J| = |K| / |K̃| with |K̃| = √3/4
        let expected = 0.5 / (3f64.sqrt() / 4.0);
        assert!((affine::det(&j).abs() - expected).abs() < 1e-14);
        // hand solution of J [1,0]^T = (1,0), J [1/2, √3/2]^T = (0,1)
        let s = 3f64.sqrt();
        let hand = [[1.0, -1.0 / s], [0.0, 2.0 / s]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((j[r][c] - hand[r][c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_cell_rejected() {
        let err = Mesh::<2>::new(
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            vec![0, 1, 2],
            vec![0, 1, 1, 2, 2, 0],
            vec![1, 1, 1],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateCell { cell: 0, .. }));
    }

    #[test]
    fn open_untagged_facet_rejected() {
        let err = Mesh::<2>::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![0, 1, 2],
            vec![0, 1],
            vec![1],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConforming(_)));
    }

    #[test]
    fn periodic_pairs_are_geometry_consistent() {
        let mesh = rectangle(4, 3, [0.0, 2.0], [0.0, 1.0])
            .unwrap()
            .with_periodicity([Some(2.0), Some(1.0)])
            .unwrap();
        let pairs = mesh.periodic_pairs();
        // right column (4) + top row (5) - shared corner counted once = 8
        assert_eq!(pairs.len(), 4 + 5 - 1 + 0);
        for (v, r) in pairs {
            assert_eq!(mesh.representative(r), r);
            let (a, b) = (mesh.vertex(v), mesh.vertex(r));
            assert!(a[0] - b[0] == 0.0 || (a[0] - b[0] - 2.0).abs() < 1e-12);
            assert!(a[1] - b[1] == 0.0 || (a[1] - b[1] - 1.0).abs() < 1e-12);
        }
        assert_eq!(mesh.representative(mesh.num_vertices() - 1), 0);
    }

    #[test]
    fn wrong_period_rejected() {
        let r = rectangle(2, 2, [0.0, 1.0], [0.0, 1.0])
            .unwrap()
            .with_periodicity([Some(0.5), None]);
        assert!(matches!(r, Err(Error::Periodicity(_))));
    }
}
