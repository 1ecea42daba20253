//! Gauss-Legendre and collapsed (Duffy) simplex quadrature.

/// `n`-point Gauss-Legendre rule on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Legendre polynomial `P_n(t)` and its derivative.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (t * p - p0) / (t * t - 1.0);
    (p, dp)
}

/// Quadrature on a simplex in barycentric coordinates. Weights sum to one,
/// so `∫_K f ≈ |K| Σ w_q f(x_q)`.
#[derive(Debug, Clone)]
pub struct SimplexQuadrature {
    pub dim: usize,
    pub degree: usize,
    /// `dim + 1` barycentric coordinates per point.
    pub bary: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexQuadrature {
    /// Rule exact for polynomials of total degree `degree` on a `dim`-simplex.
    pub fn new(dim: usize, degree: usize) -> Self {
        let (bary, weights) = match dim {
            0 => (vec![vec![1.0]], vec![1.0]),
            1 => {
                let (x, w) = gauss_legendre((degree + 2) / 2);
                (x.iter().map(|&s| vec![1.0 - s, s]).collect(), w)
            }
            2 => {
                // collapse (a, b) ∈ [0,1]² ↦ (a(1-b), b); the Jacobian adds one degree in b
                let n = (degree + 3) / 2;
                let (x, w) = gauss_legendre(n);
                let mut bary = Vec::with_capacity(n * n);
                let mut weights = Vec::with_capacity(n * n);
                for (b, wb) in x.iter().zip(&w) {
                    for (a, wa) in x.iter().zip(&w) {
                        let (s, t) = (a * (1.0 - b), *b);
                        bary.push(vec![1.0 - s - t, s, t]);
                        weights.push(2.0 * wa * wb * (1.0 - b));
                    }
                }
                (bary, weights)
            }
            _ => unimplemented!("quadrature in dimension {dim}"),
        };
        Self {
            dim,
            degree,
            bary,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical point for barycentric point `q` of a cell with vertices `verts`.
    pub fn point<const D: usize>(&self, verts: &[[f64; D]], q: usize) -> [f64; D] {
        let mut x = [0.0; D];
        for (m, v) in verts.iter().enumerate() {
            for r in 0..D {
                x[r] += self.bary[q][m] * v[r];
            }
        }
        x
    }
}
