//! Small dense helpers for the affine maps of simplices (d ≤ 3).

pub type Mat<const D: usize> = [[f64; D]; D];

pub fn det<const D: usize>(m: &Mat<D>) -> f64 {
    match D {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unimplemented!("simplices of dimension {D}"),
    }
}

/// Inverse of a non-singular matrix; the caller checks the determinant.
pub fn inverse<const D: usize>(m: &Mat<D>) -> Mat<D> {
    let dt = det(m);
    let mut inv = [[0.0; D]; D];
    match D {
        1 => inv[0][0] = 1.0 / m[0][0],
        2 => {
            inv[0][0] = m[1][1] / dt;
            inv[0][1] = -m[0][1] / dt;
            inv[1][0] = -m[1][0] / dt;
            inv[1][1] = m[0][0] / dt;
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / dt;
                }
            }
        }
        _ => unimplemented!("simplices of dimension {D}"),
    }
    inv
}

pub fn mul<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> Mat<D> {
    let mut c = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            c[i][j] = (0..D).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose<const D: usize>(a: &Mat<D>) -> Mat<D> {
    let mut t = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mat_vec<const D: usize>(a: &Mat<D>, v: &[f64; D]) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = (0..D).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

pub fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Vertices of the unit-edge equilateral reference simplex.
pub fn equilateral_vertices<const D: usize>() -> Vec<[f64; D]> {
    let mut v = vec![[0.0; D]; D + 1];
    match D {
        1 => v[1][0] = 1.0,
        2 => {
            v[1][0] = 1.0;
            v[2][0] = 0.5;
            v[2][1] = 3f64.sqrt() / 2.0;
        }
        3 => {
            v[1][0] = 1.0;
            v[2][0] = 0.5;
            v[2][1] = 3f64.sqrt() / 2.0;
            v[3][0] = 0.5;
            v[3][1] = 3f64.sqrt() / 6.0;
            v[3][2] = (2.0f64 / 3.0).sqrt();
        }
        _ => unimplemented!("simplices of dimension {D}"),
    }
    v
}

/// Edge-vector matrix `[v1 - v0, ..., vd - v0]` (columns).
pub fn edge_matrix<const D: usize>(verts: &[[f64; D]]) -> Mat<D> {
    let mut g = [[0.0; D]; D];
    for c in 0..D {
        for r in 0..D {
            g[r][c] = verts[c + 1][r] - verts[0][r];
        }
    }
    g
}
