use crate::mesh::lattice_indices;

/// Nodal Lagrange basis of degree `k` on a `d`-simplex, written in
/// barycentric coordinates on the principal lattice:
/// `φ_α(λ) = Π_m Π_{s<α_m} (kλ_m − s)/(s + 1)`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub dim: usize,
    pub degree: usize,
    pub alphas: Vec<Vec<usize>>,
}

impl LagrangeBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            alphas: lattice_indices(dim, degree),
        }
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// 1D factor `Π_{s<a} (kλ − s)/(s + 1)` and its derivative in λ.
    fn factor(&self, a: usize, lambda: f64) -> (f64, f64) {
        let k = self.degree as f64;
        let mut val = 1.0;
        let mut der = 0.0;
        for s in 0..a {
            let sf = s as f64;
            let f = (k * lambda - sf) / (sf + 1.0);
            let df = k / (sf + 1.0);
            der = der * f + val * df;
            val *= f;
        }
        (val, der)
    }

    pub fn values(&self, bary: &[f64], out: &mut [f64]) {
        for (n, alpha) in self.alphas.iter().enumerate() {
            out[n] = alpha.iter().zip(bary).map(|(&a, &l)| self.factor(a, l).0).product();
        }
    }

    /// Derivatives `∂φ_n/∂λ_m`, stored as `out[n * (dim + 1) + m]`.
    pub fn bary_derivatives(&self, bary: &[f64], out: &mut [f64]) {
        let nb = self.dim + 1;
        for (n, alpha) in self.alphas.iter().enumerate() {
            let f: Vec<(f64, f64)> = alpha.iter().zip(bary).map(|(&a, &l)| self.factor(a, l)).collect();
            for m in 0..nb {
                out[n * nb + m] = (0..nb).map(|l| if l == m { f[l].1 } else { f[l].0 }).product();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_property() {
        for d in 1..=2 {
            for k in 1..=3 {
                let b = LagrangeBasis::new(d, k);
                let mut v = vec![0.0; b.len()];
                for (n, alpha) in b.alphas.iter().enumerate() {
                    let bary: Vec<f64> = alpha.iter().map(|&a| a as f64 / k as f64).collect();
                    b.values(&bary, &mut v);
                    for (m, x) in v.iter().enumerate() {
                        let e = if m == n { 1.0 } else { 0.0 };
                        assert!((x - e).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = LagrangeBasis::new(2, 3);
        let bary = [0.2, 0.3, 0.5];
        let mut der = vec![0.0; b.len() * 3];
        b.bary_derivatives(&bary, &mut der);
        let h = 1e-6;
        for m in 0..3 {
            let mut p = bary;
            let mut q = bary;
            p[m] += h;
            q[m] -= h;
            let (mut vp, mut vq) = (vec![0.0; b.len()], vec![0.0; b.len()]);
            b.values(&p, &mut vp);
            b.values(&q, &mut vq);
            for n in 0..b.len() {
                let fd = (vp[n] - vq[n]) / (2.0 * h);
                assert!((fd - der[n * 3 + m]).abs() < 1e-7);
            }
        }
    }
}
