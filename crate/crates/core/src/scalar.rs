//! First-order P1 forward-Euler solver for scalar conservation laws with the
//! nodal viscosity, plus executable checks of its discrete maximum principle.

use std::sync::Arc;

use crate::elements::{reference_stencil, LagrangeSpace, NodalGeometry, SimplexQuadrature, Tabulation};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{affine, PatchTable};

/// Flux `f(q, x)` of a scalar law `∂_t q + div f(q) = 0`. A dependence on `x`
/// must be divergence free (as for rigid rotation).
pub trait ScalarFlux<const D: usize>: Send + Sync {
    fn flux(&self, q: f64, x: [f64; D]) -> [f64; D];
    /// `∂f/∂q`.
    fn derivative(&self, q: f64, x: [f64; D]) -> [f64; D];
}

/// `f(q) = β q`.
#[derive(Debug, Clone, Copy)]
pub struct LinearAdvection<const D: usize> {
    pub velocity: [f64; D],
}

impl<const D: usize> ScalarFlux<D> for LinearAdvection<D> {
    fn flux(&self, q: f64, _x: [f64; D]) -> [f64; D] {
        self.velocity.map(|b| b * q)
    }

    fn derivative(&self, _q: f64, _x: [f64; D]) -> [f64; D] {
        self.velocity
    }
}

/// One-dimensional Burgers flux `q²/2`.
#[derive(Debug, Clone, Copy)]
pub struct Burgers;

impl ScalarFlux<1> for Burgers {
    fn flux(&self, q: f64, _x: [f64; 1]) -> [f64; 1] {
        [0.5 * q * q]
    }

    fn derivative(&self, q: f64, _x: [f64; 1]) -> [f64; 1] {
        [q]
    }
}

/// Rigid rotation `f(q, x) = (−y, x) q`.
#[derive(Debug, Clone, Copy)]
pub struct RotatingAdvection;

impl ScalarFlux<2> for RotatingAdvection {
    fn flux(&self, q: f64, x: [f64; 2]) -> [f64; 2] {
        [-x[1] * q, x[0] * q]
    }

    fn derivative(&self, _q: f64, x: [f64; 2]) -> [f64; 2] {
        [-x[1], x[0]]
    }
}

pub type ScalarData<const D: usize> = Arc<dyn Fn([f64; D]) -> f64 + Send + Sync>;

/// A scalar law with its initial data and an estimate `β ≥ sup |f′|`.
#[derive(Clone)]
pub struct ScalarProblem<const D: usize> {
    pub flux: Arc<dyn ScalarFlux<D>>,
    pub initial: ScalarData<D>,
    pub beta: f64,
}

impl<const D: usize> ScalarProblem<D> {
    pub fn new(flux: Arc<dyn ScalarFlux<D>>, initial: ScalarData<D>, beta: f64) -> Self {
        Self { flux, initial, beta }
    }

    /// Nodal values of the initial data; rejects non-finite values.
    pub fn initial_values(&self, space: &LagrangeSpace<D>) -> Result<Vec<f64>> {
        let q = space.interpolate(|x| (self.initial)(x));
        match q.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::InvalidState(format!("initial data at dof {i} is {}", q[i]))),
            None => Ok(q),
        }
    }
}

/// The CFL number `1 / ((1 + dκ) κ)` of the forward-Euler step.
pub fn cfl_constant(dim: usize, kappa: f64) -> f64 {
    1.0 / ((1.0 + dim as f64 * kappa) * kappa)
}

/// Largest admissible step `[(1 + dκ) β max_j|∇φ_j| κ]⁻¹`; unbounded if `β = 0`.
pub fn scalar_cfl(geometry: &NodalGeometry, beta: f64, kappa: f64) -> f64 {
    let g = max_gradient(geometry);
    let denom = (1.0 + geometry.dim as f64 * kappa) * beta * g * kappa;
    if denom > 0.0 {
        1.0 / denom
    } else {
        f64::INFINITY
    }
}

/// `max_j |∇φ_j|` over the mesh.
pub fn max_gradient(geometry: &NodalGeometry) -> f64 {
    geometry.phi.iter().copied().fold(0.0, f64::max)
}

/// `max_i κ_i`.
pub fn max_quality(geometry: &NodalGeometry) -> f64 {
    geometry.kappa.iter().copied().fold(1.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmpViolation {
    pub node: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Nodes whose new value leaves `[min, max]` of the old values on their patch
/// by more than `1e-12` times the old global range.
pub fn dmp_check(old: &[f64], new: &[f64], patch: &PatchTable) -> Vec<DmpViolation> {
    let (lo, hi) = old.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    let tol = 1e-12 * if range > 0.0 { range } else { lo.abs().max(hi.abs()) };
    let mut out = Vec::new();
    for (i, &v) in new.iter().enumerate() {
        let nb = patch.neighbors(i);
        let lower = nb.iter().map(|&j| old[j]).fold(f64::INFINITY, f64::min);
        let upper = nb.iter().map(|&j| old[j]).fold(f64::NEG_INFINITY, f64::max);
        if !(v >= lower - tol && v <= upper + tol) {
            out.push(DmpViolation {
                node: i,
                value: v,
                lower,
                upper,
            });
        }
    }
    out
}

/// Both sides of the trapezoid identity for local dofs `a`, `b` of `cell`:
/// `∫_K ε_h (Jᵀ∇φ_b)·(Jᵀ∇φ_a) dx` by quadrature, and
/// `(1/(d+1)) Σ_l ε_l ∫_K (Jᵀ∇φ_b)·(Jᵀ∇φ_a) dx` in closed form.
pub fn trapezoid_identity<const D: usize>(
    space: &LagrangeSpace<D>,
    cell: usize,
    eps: &[f64],
    a: usize,
    b: usize,
) -> Result<(f64, f64)> {
    if space.degree() != 1 {
        return Err(Error::UnsupportedDegree(space.degree()));
    }
    let n = D + 1;
    let j = space.mesh().equilateral_jacobian(cell)?;
    let jt = affine::transpose(&j);
    let bg = space.bary_gradients(cell);
    let (ga, gb) = (affine::mat_vec(&jt, &bg[a]), affine::mat_vec(&jt, &bg[b]));
    let integrand = affine::dot(&ga, &gb);
    let rule = SimplexQuadrature::new(D, 2);
    let verts = space.mesh().cell_coords(cell);
    let lhs: f64 = (0..rule.len())
        .map(|q| {
            // the linear interpolant of ε at a physical point
            let x = rule.point(&verts, q);
            let lam = barycentric(&verts, x);
            let e: f64 = lam.iter().zip(eps).map(|(l, e)| l * e).sum();
            rule.weights[q] * space.measure(cell) * e * integrand
        })
        .sum();
    let stencil = reference_stencil(space, cell)?;
    let rhs = eps[..n].iter().sum::<f64>() / n as f64 * stencil[a * n + b];
    Ok((lhs, rhs))
}

fn barycentric<const D: usize>(verts: &[[f64; D]], x: [f64; D]) -> Vec<f64> {
    let g = affine::edge_matrix(verts);
    let mut d = x;
    for r in 0..D {
        d[r] -= verts[0][r];
    }
    let l = affine::mat_vec(&affine::inverse(&g), &d);
    let mut out = Vec::with_capacity(D + 1);
    out.push(1.0 - l.iter().sum::<f64>());
    out.extend_from_slice(&l);
    out
}

/// Result of a CFL-checked step.
#[derive(Debug, Clone)]
pub struct ScalarStep {
    pub q: Vec<f64>,
    pub tau: f64,
    pub tau_max: f64,
    pub cfl_violated: bool,
}

/// What a step larger than the CFL bound does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflPolicy {
    Reject,
    /// Take the step and flag it.
    Warn,
}

/// Forward-Euler P1 solver of a scalar law with nodal first-order viscosity.
pub struct ScalarSolver<const D: usize> {
    space: LagrangeSpace<D>,
    geometry: NodalGeometry,
    flux: Arc<dyn ScalarFlux<D>>,
    tab: Tabulation,
    /// Quadrature points per cell.
    points: Vec<Vec<[f64; D]>>,
    stencils: Vec<Vec<f64>>,
}

impl<const D: usize> ScalarSolver<D> {
    pub fn new(space: LagrangeSpace<D>, flux: Arc<dyn ScalarFlux<D>>) -> Result<Self> {
        if space.degree() != 1 {
            return Err(Error::UnsupportedDegree(space.degree()));
        }
        let geometry = NodalGeometry::new(&space)?;
        if let Some(i) = geometry.lumped.iter().position(|m| !(*m > 0.0)) {
            return Err(Error::EmptyPatch(i));
        }
        let tab = space.tabulate(SimplexQuadrature::new(D, 2));
        let points = (0..space.num_cells())
            .map(|c| {
                let verts = space.mesh().cell_coords(c);
                (0..tab.rule.len()).map(|q| tab.rule.point(&verts, q)).collect()
            })
            .collect();
        let stencils = (0..space.num_cells())
            .map(|c| reference_stencil(&space, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            space,
            geometry,
            flux,
            tab,
            points,
            stencils,
        })
    }

    pub fn space(&self) -> &LagrangeSpace<D> {
        &self.space
    }

    pub fn geometry(&self) -> &NodalGeometry {
        &self.geometry
    }

    fn q_at(&self, q: &[f64], c: usize, p: usize) -> f64 {
        let vals = &self.tab.values[p * (D + 1)..(p + 1) * (D + 1)];
        self.space.cell_dofs(c).iter().zip(vals).map(|(&j, v)| q[j] * v).sum()
    }

    /// `max |f′(q_h)|` per cell over its nodes and quadrature points.
    fn cell_bounds(&self, q: &[f64]) -> Vec<f64> {
        let verts_of = |c| self.space.mesh().cell_coords(c);
        (0..self.space.num_cells())
            .map(|c| {
                let dofs = self.space.cell_dofs(c);
                let verts = verts_of(c);
                let nodal = dofs
                    .iter()
                    .zip(&verts)
                    .map(|(&j, &x)| affine::norm(&self.flux.derivative(q[j], x)));
                let quad = (0..self.tab.rule.len())
                    .map(|p| affine::norm(&self.flux.derivative(self.q_at(q, c, p), self.points[c][p])));
                nodal.chain(quad).fold(0.0, f64::max)
            })
            .collect()
    }

    /// `‖f′(q_h)‖_{L∞(S_i)}` sampled at the patch nodes and quadrature points.
    pub fn derivative_bound(&self, q: &[f64]) -> Vec<f64> {
        let cells = self.cell_bounds(q);
        let patch = &self.geometry.fine_patch;
        (0..self.space.ndof())
            .map(|i| patch.cells(i).iter().map(|&c| cells[c]).fold(0.0, f64::max))
            .collect()
    }

    /// `ε_i = C_i m_i ‖f′(q_h)‖_{L∞(S_i)} max_{j≠i} |∇φ_j|`.
    pub fn viscosity(&self, q: &[f64]) -> Vec<f64> {
        self.derivative_bound(q)
            .iter()
            .enumerate()
            .map(|(i, b)| self.geometry.scale(i) * b)
            .collect()
    }

    /// Largest admissible step for the current state.
    pub fn max_step(&self, q: &[f64]) -> f64 {
        let beta = self.derivative_bound(q).into_iter().fold(0.0, f64::max);
        scalar_cfl(&self.geometry, beta, max_quality(&self.geometry))
    }

    /// Local operator `L_K[a][b]` with `f′` frozen at `frozen`:
    /// `∫_K f′·∇φ_b φ_a dx + ε̄_K ∫_K (Jᵀ∇φ_b)·(Jᵀ∇φ_a) dx`.
    fn local_operator(&self, frozen: &[f64], eps: &[f64], c: usize) -> Vec<f64> {
        let n = D + 1;
        let dofs = self.space.cell_dofs(c);
        let bg = self.space.bary_gradients(c);
        let meas = self.space.measure(c);
        let eps_bar = dofs.iter().map(|&j| eps[j]).sum::<f64>() / n as f64;
        let st = &self.stencils[c];
        let mut loc: Vec<f64> = st.iter().map(|s| eps_bar * s).collect();
        for p in 0..self.tab.rule.len() {
            let w = self.tab.rule.weights[p] * meas;
            let fp = self.flux.derivative(self.q_at(frozen, c, p), self.points[c][p]);
            let vals = &self.tab.values[p * n..(p + 1) * n];
            for a in 0..n {
                for b in 0..n {
                    loc[a * n + b] += w * vals[a] * affine::dot(&fp, &bg[b]);
                }
            }
        }
        loc
    }

    /// Step map `v ↦ v − τ M_L⁻¹ (A(frozen) + B(ε)) v`, affine in `v`.
    pub fn step_with(&self, frozen: &[f64], eps: &[f64], v: &[f64], tau: f64) -> Vec<f64> {
        let n = D + 1;
        let mut r = vec![0.0; v.len()];
        for c in 0..self.space.num_cells() {
            let dofs = self.space.cell_dofs(c);
            let loc = self.local_operator(frozen, eps, c);
            for a in 0..n {
                r[dofs[a]] += (0..n).map(|b| loc[a * n + b] * v[dofs[b]]).sum::<f64>();
            }
        }
        v.iter()
            .zip(&r)
            .zip(&self.geometry.lumped)
            .map(|((v, r), m)| v - tau / m * r)
            .collect()
    }

    /// The matrix of [`Self::step_with`]; row `i` holds `a` on the diagonal
    /// and the `b_j` off it.
    pub fn step_matrix(&self, frozen: &[f64], eps: &[f64], tau: f64) -> CsrMatrix {
        let mut op = self.space.pattern().clone();
        for c in 0..self.space.num_cells() {
            op.add_local(self.space.cell_dofs(c), &self.local_operator(frozen, eps, c));
        }
        let m = &self.geometry.lumped;
        let mut trip = Vec::with_capacity(op.nnz() + op.nrows());
        for i in 0..op.nrows() {
            trip.push((i, i, 1.0));
            let (cols, vals) = op.row(i);
            trip.extend(cols.iter().zip(vals).map(|(&j, &a)| (i, j, -tau / m[i] * a)));
        }
        CsrMatrix::from_triplets(op.nrows(), op.ncols(), &trip)
    }

    /// One forward-Euler step with the viscosity of `q`.
    pub fn step(&self, q: &[f64], tau: f64) -> Vec<f64> {
        let eps = self.viscosity(q);
        self.step_with(q, &eps, q, tau)
    }

    /// One step after comparing `tau` with the CFL bound.
    pub fn checked_step(&self, q: &[f64], tau: f64, policy: CflPolicy) -> Result<ScalarStep> {
        let tau_max = self.max_step(q);
        let cfl_violated = tau > tau_max * (1.0 + 1e-12);
        if cfl_violated && policy == CflPolicy::Reject {
            return Err(Error::Config(format!("time step {tau:e} exceeds the CFL bound {tau_max:e}")));
        }
        Ok(ScalarStep {
            q: self.step(q, tau),
            tau,
            tau_max,
            cfl_violated,
        })
    }

    /// `steps` steps of size `fraction × τ_max`, recomputed every step.
    /// Returns the final state and the maximum-principle violations of each
    /// step.
    pub fn run(&self, q0: &[f64], steps: usize, fraction: f64) -> Result<(Vec<f64>, Vec<Vec<DmpViolation>>)> {
        if !(fraction > 0.0) {
            return Err(Error::Config(format!("CFL fraction must be positive, got {fraction}")));
        }
        let mut q = q0.to_vec();
        let mut report = Vec::with_capacity(steps);
        for _ in 0..steps {
            let tau_max = self.max_step(&q);
            if !tau_max.is_finite() {
                report.push(Vec::new());
                continue;
            }
            let next = self.step(&q, fraction * tau_max);
            report.push(dmp_check(&q, &next, &self.geometry.fine_patch));
            q = next;
        }
        Ok((q, report))
    }

    /// Like [`Self::run`] with the viscosity removed.
    pub fn run_inviscid(&self, q0: &[f64], steps: usize, tau: f64) -> (Vec<f64>, Vec<Vec<DmpViolation>>) {
        let zero = vec![0.0; q0.len()];
        let mut q = q0.to_vec();
        let mut report = Vec::with_capacity(steps);
        for _ in 0..steps {
            let next = self.step_with(&q, &zero, &q, tau);
            report.push(dmp_check(&q, &next, &self.geometry.fine_patch));
            q = next;
        }
        (q, report)
    }
}

/// Outcome of [`dmp_suite`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DmpSuiteReport {
    pub trials: usize,
    pub steps: usize,
    /// Local maximum-principle violations with the viscosity on.
    pub violations: usize,
    /// Violations of the global bounds `[q_min, q_max]` of the data.
    pub bound_violations: usize,
    /// Smallest convex-combination coefficient of the first step.
    pub min_coefficient: f64,
    /// Largest `|a + Σ b_j − 1|` of the first step.
    pub max_row_sum_error: f64,
    /// Violations of the inviscid negative control.
    pub control_violations: usize,
}

/// Mesh, flux and data of one randomized trial: even trials are periodic 1D
/// Burgers, odd trials 2D rotation on `[−1, 1]²`.
pub enum DmpTrial {
    Burgers(ScalarSolver<1>, Vec<f64>),
    Rotation(ScalarSolver<2>, Vec<f64>),
}

pub fn dmp_trial(trial: usize, seed: u64) -> Result<DmpTrial> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mesh_seed = rng.gen();
    if trial % 2 == 0 {
        let n = rng.gen_range(16..=64);
        let mesh = crate::mesh::perturbed_interval(n, 0.0, 1.0, 0.3, mesh_seed)?.with_periodicity([Some(1.0)])?;
        let solver = ScalarSolver::new(LagrangeSpace::new(&mesh, 1)?, Arc::new(Burgers))?;
        // piecewise constant data with random jumps
        let pieces: Vec<f64> = (0..rng.gen_range(2..=6)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let q = solver
            .space()
            .dof_coords()
            .iter()
            .map(|x| pieces[((x[0] * pieces.len() as f64) as usize).min(pieces.len() - 1)])
            .collect();
        Ok(DmpTrial::Burgers(solver, q))
    } else {
        let n = rng.gen_range(6..=14);
        let mesh = crate::mesh::perturbed_rectangle(n, n, [-1.0, 1.0], [-1.0, 1.0], 0.25, mesh_seed)?;
        let solver = ScalarSolver::new(LagrangeSpace::new(&mesh, 1)?, Arc::new(RotatingAdvection))?;
        let q = (0..solver.space().ndof()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Ok(DmpTrial::Rotation(solver, q))
    }
}

/// Runs `trials` randomized forward-Euler runs of `steps` steps at the CFL
/// bound, checks the local maximum principle after every step and the
/// convex-combination coefficients of the first step, and repeats every run
/// without viscosity as a negative control.
pub fn dmp_suite(trials: usize, steps: usize, seed: u64) -> Result<DmpSuiteReport> {
    let mut report = DmpSuiteReport {
        trials,
        steps,
        min_coefficient: f64::INFINITY,
        ..Default::default()
    };
    for t in 0..trials {
        match dmp_trial(t, seed)? {
            DmpTrial::Burgers(s, q) => suite_trial(&s, &q, steps, &mut report)?,
            DmpTrial::Rotation(s, q) => suite_trial(&s, &q, steps, &mut report)?,
        }
    }
    Ok(report)
}

fn suite_trial<const D: usize>(s: &ScalarSolver<D>, q0: &[f64], steps: usize, report: &mut DmpSuiteReport) -> Result<()> {
    let tau = s.max_step(q0);
    let mat = s.step_matrix(q0, &s.viscosity(q0), tau);
    for i in 0..mat.nrows() {
        let (_, vals) = mat.row(i);
        report.min_coefficient = vals.iter().copied().fold(report.min_coefficient, f64::min);
        report.max_row_sum_error = report.max_row_sum_error.max((vals.iter().sum::<f64>() - 1.0).abs());
    }
    let (lo, hi) = q0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let tol = 1e-12 * (hi - lo);
    let mut q = q0.to_vec();
    for _ in 0..steps {
        let (next, v) = s.run(&q, 1, 1.0)?;
        report.violations += v.iter().map(Vec::len).sum::<usize>();
        report.bound_violations += next.iter().filter(|&&x| x < lo - tol || x > hi + tol).count();
        q = next;
    }
    let (_, control) = s.run_inviscid(q0, steps, tau);
    report.control_violations += control.iter().map(Vec::len).sum::<usize>();
    Ok(())
}
