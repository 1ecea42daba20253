//! Structured and randomly perturbed meshes of intervals and rectangles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Mesh;
use crate::error::{Error, Result};

/// Boundary tags used by the built-in generators.
pub struct BoxTags;

impl BoxTags {
    pub const LEFT: u32 = 1;
    pub const RIGHT: u32 = 2;
    pub const BOTTOM: u32 = 3;
    pub const TOP: u32 = 4;
}

/// Uniform mesh of `n` cells on `[a, b]`.
pub fn interval(n: usize, a: f64, b: f64) -> Result<Mesh<1>> {
    perturbed_interval(n, a, b, 0.0, 0)
}

/// Mesh of `n` cells on `[a, b]` with interior nodes moved by up to
/// `amplitude * h` (amplitude < 0.5 keeps cells positive).
pub fn perturbed_interval(n: usize, a: f64, b: f64, amplitude: f64, seed: u64) -> Result<Mesh<1>> {
    if n == 0 || !(b > a) {
        return Err(Error::Config(format!("bad interval [{a}, {b}] with {n} cells")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = (b - a) / n as f64;
    let vertices = (0..=n)
        .map(|i| {
            let mut x = a + i as f64 * h;
            if i > 0 && i < n && amplitude > 0.0 {
                x += amplitude * h * rng.gen_range(-1.0..=1.0);
            }
            if i == n {
                x = b;
            }
            [x]
        })
        .collect();
    let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
    Mesh::new(vertices, cells, vec![0, n], vec![BoxTags::LEFT, BoxTags::RIGHT])
}

/// Uniform `nx × ny` rectangle grid, each square split along the same
/// diagonal, so interior vertices touch six cells.
pub fn rectangle(nx: usize, ny: usize, xr: [f64; 2], yr: [f64; 2]) -> Result<Mesh<2>> {
    build_rectangle(nx, ny, xr, yr, 0.0, false, 0)
}

/// Rectangle grid with random diagonals and interior vertices jittered by up
/// to `amplitude * h` per axis. Boundary vertices stay on the grid so that
/// periodic images still match.
pub fn perturbed_rectangle(
    nx: usize,
    ny: usize,
    xr: [f64; 2],
    yr: [f64; 2],
    amplitude: f64,
    seed: u64,
) -> Result<Mesh<2>> {
    build_rectangle(nx, ny, xr, yr, amplitude, true, seed)
}

fn build_rectangle(
    nx: usize,
    ny: usize,
    xr: [f64; 2],
    yr: [f64; 2],
    amplitude: f64,
    random_diagonals: bool,
    seed: u64,
) -> Result<Mesh<2>> {
    if nx == 0 || ny == 0 || !(xr[1] > xr[0]) || !(yr[1] > yr[0]) {
        return Err(Error::Config(format!("bad rectangle {xr:?} × {yr:?} with {nx}×{ny} cells")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (hx, hy) = ((xr[1] - xr[0]) / nx as f64, (yr[1] - yr[0]) / ny as f64);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let mut x = if i == nx { xr[1] } else { xr[0] + i as f64 * hx };
            let mut y = if j == ny { yr[1] } else { yr[0] + j as f64 * hy };
            if amplitude > 0.0 && i > 0 && i < nx && j > 0 && j < ny {
                x += amplitude * hx * rng.gen_range(-1.0..=1.0);
                y += amplitude * hy * rng.gen_range(-1.0..=1.0);
            }
            vertices.push([x, y]);
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if random_diagonals && rng.gen_bool(0.5) {
                cells.extend([a, b, d, b, c, d]);
            } else {
                cells.extend([a, b, c, a, c, d]);
            }
        }
    }
    let mut facets = Vec::new();
    let mut tags = Vec::new();
    for i in 0..nx {
        facets.extend([id(i, 0), id(i + 1, 0)]);
        tags.push(BoxTags::BOTTOM);
        facets.extend([id(i + 1, ny), id(i, ny)]);
        tags.push(BoxTags::TOP);
    }
    for j in 0..ny {
        facets.extend([id(0, j + 1), id(0, j)]);
        tags.push(BoxTags::LEFT);
        facets.extend([id(nx, j), id(nx, j + 1)]);
        tags.push(BoxTags::RIGHT);
    }
    Mesh::new(vertices, cells, facets, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_counts_and_area() {
        let m = rectangle(3, 2, [0.0, 3.0], [-1.0, 1.0]).unwrap();
        assert_eq!(m.num_vertices(), 12);
        assert_eq!(m.num_cells(), 12);
        assert_eq!(m.num_facets(), 10);
        assert!((m.total_measure() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn perturbed_rectangle_keeps_area() {
        let m = perturbed_rectangle(8, 8, [0.0, 1.0], [0.0, 1.0], 0.2, 7).unwrap();
        assert!((m.total_measure() - 1.0).abs() < 1e-13);
        let p = perturbed_rectangle(8, 8, [0.0, 1.0], [0.0, 1.0], 0.2, 7).unwrap();
        assert_eq!(m.vertices(), p.vertices());
    }
}
