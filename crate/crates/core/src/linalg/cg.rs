use super::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Solve on the mean-zero subspace (singular Neumann or periodic Laplacians).
    pub mean_zero: bool,
}

impl CgOptions {
    pub fn mass() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 1000,
            mean_zero: false,
        }
    }

    pub fn poisson() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iter: 20_000,
            mean_zero: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `sqrt(rᵀ D⁻¹ r) / sqrt(bᵀ D⁻¹ b)`.
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for `A x = b`.
///
/// `diag` is the preconditioner diagonal `D` (applied as `D⁻¹ r`). The
/// stopping test uses the preconditioned norm `sqrt(rᵀ D⁻¹ r)` relative to
/// the same norm of `b`. All reductions are sequential.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], diag: &[f64], x0: Option<&[f64]>, opts: CgOptions) -> Result<CgReport> {
    cg_solve_monitored(a, b, diag, x0, opts, |_, _, _| {})
}

/// As [`cg_solve`], calling `monitor(k, x_k, r_k)` for every iterate.
pub fn cg_solve_monitored(
    a: &CsrMatrix,
    b: &[f64],
    diag: &[f64],
    x0: Option<&[f64]>,
    opts: CgOptions,
    mut monitor: impl FnMut(usize, &[f64], &[f64]),
) -> Result<CgReport> {
    let n = b.len();
    assert_eq!(a.nrows(), n);
    assert_eq!(diag.len(), n);
    if let Some(d) = diag.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::Breakdown(format!("non-positive preconditioner entry {d:e}")));
    }
    let mut b = b.to_vec();
    if opts.mean_zero {
        remove_mean(&mut b);
    }
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if opts.mean_zero {
        remove_mean(&mut x);
    }
    let bnorm = dot_scaled(&b, &b, diag).sqrt();
    if bnorm == 0.0 {
        let x = vec![0.0; n];
        monitor(0, &x, &b);
        return Ok(CgReport {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if opts.mean_zero {
        remove_mean(&mut r);
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    if opts.mean_zero {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    monitor(0, &x, &r);
    let mut residual = rz.max(0.0).sqrt() / bnorm;
    let mut it = 0;
    while residual > opts.rel_tol {
        if it == opts.max_iter {
            return Err(Error::NotConverged {
                iterations: it,
                residual,
            });
        }
        a.spmv(&p, &mut ax);
        let pap = dot(&p, &ax);
        if !(pap > 0.0) {
            return Err(Error::Breakdown(format!("pᵀAp = {pap:e} at iteration {it}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ax[i];
        }
        if opts.mean_zero {
            remove_mean(&mut r);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        if opts.mean_zero {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        monitor(it, &x, &r);
        residual = rz.max(0.0).sqrt() / bnorm;
        if !residual.is_finite() {
            return Err(Error::Breakdown(format!("non-finite residual at iteration {it}")));
        }
    }
    if opts.mean_zero {
        remove_mean(&mut x);
    }
    Ok(CgReport {
        x,
        iterations: it,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_scaled(a: &[f64], b: &[f64], d: &[f64]) -> f64 {
    a.iter().zip(b).zip(d).map(|((x, y), w)| x * y / w).sum()
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}
