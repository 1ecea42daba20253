//! Benchmark problems, error norms, convergence tables and field output.

mod norms;
mod output;
mod problems;
mod schlieren;

pub use norms::{
    error_norms, error_norms_with, observed_rate, rate_table, read_rate_csv, write_rate_csv, ErrorReport, RateRow,
    CSV_HEADER, NORMS, VARIABLES,
};
pub use output::{primitive_fields, write_metadata, write_mhd_vtu, write_nodal_csv, write_vtu, PointData};
pub use problems::{
    orszag_tang_state, problem, problem_with, registry, registry_with, vortex_state, BoundaryKind, ProblemKind,
    ProblemParams, ProblemSpec, BLAST_AMBIENT_PRESSURE, BLAST_INNER_PRESSURE, BRIO_WU_LEFT, BRIO_WU_RIGHT,
    VORTEX_B0, VORTEX_MU, VORTEX_U0,
};
pub use schlieren::{nodal_gradient, schlieren};

use crate::elements::LagrangeSpace;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::physics::{Mhd2d, Primitive};
use crate::solver::{RunOutput, SolverConfig};

/// Runs `spec` on an `n`-cell mesh and measures the error at the final time
/// against the exact solution.
pub fn exact_error(
    spec: &ProblemSpec,
    degree: usize,
    n: usize,
    perturbed: bool,
    config: SolverConfig,
) -> Result<(ErrorReport, RunOutput)> {
    if !spec.has_exact {
        return Err(Error::Config(format!("problem '{}' has no exact solution", spec.name)));
    }
    let mesh = spec.mesh(n, perturbed)?;
    let solver = spec.solver(&mesh, degree, config)?;
    let u0 = spec.initial_field(&solver.space)?;
    let out = solver.run(u0, &mut ())?;
    let t = out.state.time;
    let report = error_norms(&solver.space, &solver.law, &out.state.u, |x| {
        spec.exact(x, t).expect("exact solution")
    })?;
    Ok((report, out))
}

/// Error reports on a sequence of resolutions.
pub fn converge(
    spec: &ProblemSpec,
    degree: usize,
    resolutions: &[usize],
    perturbed: bool,
    config: &SolverConfig,
) -> Result<Vec<ErrorReport>> {
    resolutions
        .iter()
        .map(|&n| exact_error(spec, degree, n, perturbed, config.clone()).map(|r| r.0))
        .collect()
}

/// Primitive state along a one-row strip as a piecewise linear profile in x.
#[derive(Debug, Clone)]
pub struct StripProfile {
    samples: Vec<(f64, Primitive)>,
}

impl StripProfile {
    /// Samples the nodes of the bottom row of a P1 strip.
    pub fn new(space: &LagrangeSpace<2>, law: &Mhd2d, u: &Field) -> Result<Self> {
        let y0 = space.mesh().bounding_box().0[1];
        let mut samples = Vec::new();
        for i in 0..u.ndof() {
            let x = space.dof_coord(i);
            if (x[1] - y0).abs() <= 1e-12 {
                samples.push((x[0], law.primitive(&u.node(i))?));
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-14);
        if samples.len() < 2 {
            return Err(Error::Config("strip profile needs at least two nodes".into()));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, Primitive)] {
        &self.samples
    }

    pub fn at(&self, x: f64) -> Primitive {
        let s = &self.samples;
        let k = s.partition_point(|p| p.0 <= x).clamp(1, s.len() - 1);
        let ((x0, a), (x1, b)) = (s[k - 1], s[k]);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        let mix = |p: f64, q: f64| p + t * (q - p);
        Primitive {
            rho: mix(a.rho, b.rho),
            u: [mix(a.u[0], b.u[0]), mix(a.u[1], b.u[1])],
            p: mix(a.p, b.p),
            b: [mix(a.b[0], b.b[0]), mix(a.b[1], b.b[1])],
        }
    }
}

/// Final-time profile of a P1 strip run with `n` cells, used as self-reference.
pub fn strip_reference(spec: &ProblemSpec, n: usize, config: SolverConfig) -> Result<StripProfile> {
    let solver = spec.solver(&spec.mesh(n, false)?, 1, config)?;
    let u0 = spec.initial_field(&solver.space)?;
    let out = solver.run(u0, &mut ())?;
    StripProfile::new(&solver.space, &solver.law, &out.state.u)
}

/// Errors of P1 strip runs against `reference`; the dof count of each report
/// is the number of nodes along x.
pub fn strip_errors(
    spec: &ProblemSpec,
    resolutions: &[usize],
    reference: &StripProfile,
    config: &SolverConfig,
) -> Result<Vec<ErrorReport>> {
    resolutions
        .iter()
        .map(|&n| {
            let solver = spec.solver(&spec.mesh(n, false)?, 1, config.clone())?;
            let u0 = spec.initial_field(&solver.space)?;
            let out = solver.run(u0, &mut ())?;
            let mut r = error_norms(&solver.space, &solver.law, &out.state.u, |x| reference.at(x[0]))?;
            r.dofs = n + 1;
            Ok(r)
        })
        .collect()
}
