use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::elements::{LagrangeSpace, SimplexQuadrature};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::physics::{Mhd2d, Primitive};

/// Variables reported by [`error_norms`]; vectors use the Euclidean norm.
pub const VARIABLES: [&str; 4] = ["rho", "u", "p", "B"];
pub const NORMS: [&str; 3] = ["L1", "L2", "Linf"];

fn variable(w: &Primitive, v: usize) -> Vec<f64> {
    match v {
        0 => vec![w.rho],
        1 => w.u.to_vec(),
        2 => vec![w.p],
        _ => w.b.to_vec(),
    }
}

/// Relative errors of one discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub dofs: usize,
    /// `errors[v][n]` for variable `v` of [`VARIABLES`] and norm `n` of [`NORMS`].
    pub errors: [[f64; 3]; 4],
}

impl ErrorReport {
    pub fn get(&self, var: &str, norm: &str) -> Option<f64> {
        let v = VARIABLES.iter().position(|&x| x == var)?;
        let n = NORMS.iter().position(|&x| x == norm)?;
        Some(self.errors[v][n])
    }
}

/// Relative L¹, L², L∞ errors of `u_h` against `exact`. Integrals use a rule of
/// degree `2k + 4`; L∞ is sampled at quadrature points and nodes.
pub fn error_norms(
    space: &LagrangeSpace<2>,
    law: &Mhd2d,
    u_h: &Field,
    exact: impl Fn([f64; 2]) -> Primitive + Sync,
) -> Result<ErrorReport> {
    error_norms_with(space, law, u_h, exact, 2 * space.degree() + 4)
}

pub fn error_norms_with(
    space: &LagrangeSpace<2>,
    law: &Mhd2d,
    u_h: &Field,
    exact: impl Fn([f64; 2]) -> Primitive + Sync,
    quad_degree: usize,
) -> Result<ErrorReport> {
    let tab = space.tabulate(SimplexQuadrature::new(2, quad_degree));
    let nloc = space.nloc();
    let mesh = space.mesh();
    // [var][norm] sums for the error and the exact field
    type Acc = ([[f64; 3]; 4], [[f64; 3]; 4]);
    let combine = |mut a: Acc, b: Acc| {
        for v in 0..4 {
            for n in 0..2 {
                a.0[v][n] += b.0[v][n];
                a.1[v][n] += b.1[v][n];
            }
            a.0[v][2] = a.0[v][2].max(b.0[v][2]);
            a.1[v][2] = a.1[v][2].max(b.1[v][2]);
        }
        a
    };
    let add = |acc: &mut Acc, wh: &Primitive, we: &Primitive, w: f64| {
        for v in 0..4 {
            let (a, b) = (variable(wh, v), variable(we, v));
            let e = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let r = b.iter().map(|y| y * y).sum::<f64>().sqrt();
            acc.0[v][0] += w * e;
            acc.0[v][1] += w * e * e;
            acc.0[v][2] = acc.0[v][2].max(e);
            acc.1[v][0] += w * r;
            acc.1[v][1] += w * r * r;
            acc.1[v][2] = acc.1[v][2].max(r);
        }
    };
    let zero: Acc = ([[0.0; 3]; 4], [[0.0; 3]; 4]);
    let cells = (0..space.num_cells())
        .into_par_iter()
        .map(|c| -> Result<Acc> {
            let dofs = space.cell_dofs(c);
            let verts = mesh.cell_coords(c);
            let mut acc = zero;
            let mut state = [0.0; 6];
            for q in 0..tab.rule.len() {
                let vals = &tab.values[q * nloc..(q + 1) * nloc];
                for (k, s) in state.iter_mut().enumerate() {
                    *s = dofs.iter().zip(vals).map(|(&i, p)| u_h.get(k, i) * p).sum();
                }
                let wh = law.primitive(&state).map_err(|e| Error::InvalidState(format!("cell {c}: {e}")))?;
                let x = tab.rule.point(&verts, q);
                add(&mut acc, &wh, &exact(x), tab.rule.weights[q] * space.measure(c));
            }
            Ok(acc)
        })
        .try_reduce(|| zero, |a, b| Ok(combine(a, b)))?;
    let mut nodes = zero;
    for i in 0..space.ndof() {
        let wh = law.primitive(&u_h.node(i))?;
        add(&mut nodes, &wh, &exact(space.dof_coord(i)), 0.0);
    }
    let (err, refn) = combine(cells, nodes);
    let mut errors = [[0.0; 3]; 4];
    for v in 0..4 {
        let e = [err[v][0], err[v][1].sqrt(), err[v][2]];
        let r = [refn[v][0], refn[v][1].sqrt(), refn[v][2]];
        for n in 0..3 {
            errors[v][n] = if r[n] > 0.0 { e[n] / r[n] } else { e[n] };
        }
    }
    Ok(ErrorReport {
        dofs: space.ndof(),
        errors,
    })
}

/// Observed rate between two runs in `dim` effective dimensions.
pub fn observed_rate(dofs0: usize, e0: f64, dofs1: usize, e1: f64, dim: usize) -> f64 {
    (e0 / e1).ln() / ((dofs1 as f64 / dofs0 as f64).ln() / dim as f64)
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub dofs: usize,
    pub var: String,
    pub norm: String,
    pub error: f64,
    /// `None` on the first row of a variable and norm.
    pub rate: Option<f64>,
}

/// Convergence table of successive reports of one problem and degree.
pub fn rate_table(reports: &[ErrorReport], dim: usize) -> Vec<RateRow> {
    let mut rows = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        for (v, var) in VARIABLES.iter().enumerate() {
            for (n, norm) in NORMS.iter().enumerate() {
                let rate = (k > 0).then(|| {
                    let p = &reports[k - 1];
                    observed_rate(p.dofs, p.errors[v][n], r.dofs, r.errors[v][n], dim)
                });
                rows.push(RateRow {
                    dofs: r.dofs,
                    var: (*var).to_owned(),
                    norm: (*norm).to_owned(),
                    error: r.errors[v][n],
                    rate,
                });
            }
        }
    }
    rows
}

pub const CSV_HEADER: &str = "dofs,var,norm,error,rate";

/// Writes rows with `comments` as leading `#` lines.
pub fn write_rate_csv(rows: &[RateRow], comments: &[String], mut w: impl Write) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let rate = r.rate.map(|x| format!("{x:.17e}")).unwrap_or_default();
        writeln!(w, "{},{},{},{:.17e},{}", r.dofs, r.var, r.norm, r.error, rate)?;
    }
    Ok(())
}

pub fn read_rate_csv(r: impl BufRead) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    let mut header = false;
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            if line != CSV_HEADER {
                return Err(Error::Config(format!("line {}: expected header '{CSV_HEADER}'", n + 1)));
            }
            header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Config(format!("line {}: malformed row '{line}'", n + 1));
        if f.len() != 5 {
            return Err(bad());
        }
        rows.push(RateRow {
            dofs: f[0].parse().map_err(|_| bad())?,
            var: f[1].to_owned(),
            norm: f[2].to_owned(),
            error: f[3].parse().map_err(|_| bad())?,
            rate: if f[4].is_empty() {
                None
            } else {
                Some(f[4].parse().map_err(|_| bad())?)
            },
        });
    }
    Ok(rows)
}
