//! Semi-discrete assembly, explicit Runge-Kutta stepping with consistent
//! mass solves, boundary conditions, divergence cleaning and the time loop.

mod assembly;
mod bcs;
pub mod checkpoint;
mod cleaning;
mod rk;

use rayon::prelude::*;

pub use assembly::assemble_rhs;
pub use bcs::{BoundaryCondition, StateFn};
pub use cleaning::{
    divergence_error, divergence_error_with, divergence_load, gradient_load, mass_norm, CleaningReport,
    DivergenceCleaner, DivergenceError,
};
pub use rk::RkScheme;

use crate::elements::{LagrangeSpace, NodalGeometry};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{cg_solve, CgOptions, CsrMatrix};
use crate::physics::ConservationLaw;
use crate::viscosity::{
    bdf2_derivative, first_order_viscosity, lambda_max, node_wave_speeds, residual_viscosity, scaled_residual,
    ResidualProjector, ViscosityField,
};
use bcs::ResolvedBcs;

/// Which nodal viscosity enters the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViscosityMode {
    /// Residual-based ε^RV, capped by ε^L.
    Residual,
    /// First-order ε^L everywhere.
    FirstOrder,
    /// Plain Galerkin.
    Off,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub cfl: f64,
    pub scheme: RkScheme,
    pub final_time: f64,
    pub cleaning: bool,
    pub viscosity: ViscosityMode,
    /// Relative tolerance of the mass solves in every stage.
    pub mass_tol: f64,
    /// Relative tolerance of the cleaning Poisson solve.
    pub poisson_tol: f64,
    /// Tolerance of the residual smoothing solve.
    pub residual_tol: f64,
    /// Call [`StepObserver::output`] every this many steps (and at the end).
    pub output_every: Option<usize>,
    /// Fixed step size overriding the CFL condition.
    pub fixed_dt: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.3,
            scheme: RkScheme::rk4(),
            final_time: 0.0,
            cleaning: true,
            viscosity: ViscosityMode::Residual,
            mass_tol: 1e-10,
            poisson_tol: 1e-8,
            residual_tol: 1e-10,
            output_every: None,
            fixed_dt: None,
            max_steps: 10_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0) {
            return Err(Error::Config(format!("CFL must be positive, got {}", self.cfl)));
        }
        if !(self.final_time >= 0.0) {
            return Err(Error::Config(format!("final time must be non-negative, got {}", self.final_time)));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return Err(Error::NonPositiveStep(dt));
            }
        }
        Ok(())
    }
}

/// State carried between time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLoopState {
    pub u: Field,
    /// Previous levels `(U^{n-1}, t^{n-1})`, `(U^{n-2}, t^{n-2})`, most recent first.
    pub history: Vec<(Field, f64)>,
    /// Viscosity used in the last step.
    pub eps: ViscosityField,
    pub time: f64,
    /// Last step size.
    pub tau: f64,
    pub step: usize,
}

impl TimeLoopState {
    pub fn new(u: Field) -> Self {
        let n = u.ndof();
        Self {
            u,
            history: Vec::new(),
            eps: ViscosityField::zeros(n),
            time: 0.0,
            tau: 0.0,
            step: 0,
        }
    }

    /// BDF approximation of `∂_t U` at the current level.
    pub fn time_derivative(&self) -> Result<Field> {
        let h1 = self.history.first();
        let h2 = self.history.get(1);
        let tau_n = h1.map_or(0.0, |(_, t)| self.time - t);
        let tau_nm1 = match (h1, h2) {
            (Some((_, t1)), Some((_, t2))) => t1 - t2,
            _ => 0.0,
        };
        let d = bdf2_derivative(
            self.u.as_slice(),
            h1.map(|(f, _)| f.as_slice()),
            h2.map(|(f, _)| f.as_slice()),
            tau_n,
            tau_nm1,
        )?;
        let n = self.u.ndof();
        Ok(Field::from_components(d.chunks(n.max(1)).map(<[f64]>::to_vec).collect()))
    }

    fn advance(&mut self, u: Field, tau: f64) {
        let old = std::mem::replace(&mut self.u, u);
        self.history.insert(0, (old, self.time));
        self.history.truncate(2);
        self.time += tau;
        self.tau = tau;
        self.step += 1;
    }
}

/// Stages of one time step in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Residual,
    Viscosity,
    RungeKutta,
    Cleaning,
    BoundaryConditions,
    LambdaMax,
    TimeStep,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub time: f64,
    pub tau: f64,
    pub max_eps: f64,
    /// Fraction of nodes where ε^RV equals the first-order cap.
    pub capped_fraction: f64,
    pub cleaning: Option<CleaningReport>,
}

/// Hooks called by [`Solver::run`].
pub trait StepObserver {
    fn stage(&mut self, _step: usize, _stage: Stage) {}
    fn step(&mut self, _info: &StepInfo, _state: &TimeLoopState) {}
    fn output(&mut self, _state: &TimeLoopState) -> Result<()> {
        Ok(())
    }
}

impl StepObserver for () {}

/// Records stage events.
#[derive(Debug, Default, Clone)]
pub struct StageLog {
    pub events: Vec<(usize, Stage)>,
}

impl StepObserver for StageLog {
    fn stage(&mut self, step: usize, stage: Stage) {
        self.events.push((step, stage));
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: TimeLoopState,
    pub steps: Vec<StepInfo>,
}

/// Assembled operators for one problem.
pub struct Solver<const D: usize, L> {
    pub space: LagrangeSpace<D>,
    pub law: L,
    pub geometry: NodalGeometry,
    pub config: SolverConfig,
    mass: CsrMatrix,
    mass_diag: Vec<f64>,
    projector: ResidualProjector,
    bcs: ResolvedBcs<D>,
    cleaner: Option<DivergenceCleaner>,
}

impl<const D: usize, L: ConservationLaw<D>> Solver<D, L> {
    pub fn new(space: LagrangeSpace<D>, law: L, bcs: &[BoundaryCondition<D>], config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let geometry = NodalGeometry::new(&space)?;
        let mass = space.consistent_mass();
        let mass_diag = mass.diagonal();
        let mut projector = ResidualProjector::new(&space);
        projector.tol = config.residual_tol;
        let bcs = ResolvedBcs::new(&space, bcs);
        let cleaner = match (config.cleaning, law.magnetic(), as_2d(&space)) {
            (true, Some(_), Some(space2)) => {
                let mut c = DivergenceCleaner::new(space2, mass.clone());
                c.mass_opts.rel_tol = config.mass_tol;
                c.poisson_opts.rel_tol = config.poisson_tol;
                Some(c)
            }
            _ => None,
        };
        Ok(Self {
            space,
            law,
            geometry,
            config,
            mass,
            mass_diag,
            projector,
            bcs,
            cleaner,
        })
    }

    pub fn mass_matrix(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn cleaner(&self) -> Option<&DivergenceCleaner> {
        self.cleaner.as_ref()
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn([f64; D]) -> Vec<f64> + Sync) -> Field {
        let coords = self.space.dof_coords();
        let nodes: Vec<Vec<f64>> = coords.par_iter().map(|&x| f(x)).collect();
        Field::from_nodes(self.law.ncomp(), coords.len(), |i| nodes[i].clone())
    }

    pub fn assemble_rhs(&self, u: &Field, eps: &[f64]) -> Result<Field> {
        assemble_rhs(&self.space, &self.law, u, eps)
    }

    /// `M⁻¹ F(U, ε)` per component.
    pub fn time_derivative(&self, u: &Field, eps: &[f64]) -> Result<Field> {
        let rhs = self.assemble_rhs(u, eps)?;
        let opts = CgOptions {
            rel_tol: self.config.mass_tol,
            ..CgOptions::mass()
        };
        let comps = (0..rhs.ncomp())
            .into_par_iter()
            .map(|c| cg_solve(&self.mass, rhs.comp(c), &self.mass_diag, None, opts).map(|r| r.x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Field::from_components(comps))
    }

    /// One Runge-Kutta step with frozen viscosity.
    pub fn rk_step(&self, u: &Field, tau: f64, eps: &[f64]) -> Result<Field> {
        let (nc, n) = (u.ncomp(), u.ndof());
        let reshape = |v: &[f64]| Field::from_components(v.chunks(n.max(1)).map(<[f64]>::to_vec).collect());
        let out = self.config.scheme.step(u.as_slice(), tau, |w| {
            let k = self.time_derivative(&reshape(w), eps)?;
            Ok(k.as_slice().to_vec())
        })?;
        let out = reshape(&out);
        debug_assert_eq!(out.ncomp(), nc);
        if let Some(pos) = out.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidState(format!(
                "non-finite value in component {} at node {}",
                pos / n,
                pos % n
            )));
        }
        Ok(out)
    }

    /// λ_max,i over fine patches.
    pub fn lambda_max(&self, u: &Field) -> Result<Vec<f64>> {
        let speeds = node_wave_speeds(&self.law, u)?;
        Ok(lambda_max(&speeds, &self.geometry.fine_patch))
    }

    pub fn first_order_viscosity(&self, lambda: &[f64]) -> Vec<f64> {
        first_order_viscosity(lambda, &self.geometry)
    }

    /// ε^RV from the current state and its history.
    pub fn residual_viscosity(&self, state: &TimeLoopState, lambda: &[f64]) -> Result<Vec<f64>> {
        let dtu = state.time_derivative()?;
        let r = self.projector.project(&self.space, &self.law, &state.u, &dtu)?;
        let s = scaled_residual(&self.law, &r, &state.u, &self.geometry);
        Ok(residual_viscosity(&s, lambda, &self.geometry))
    }

    pub fn apply_bcs(&self, u: &mut Field, t: f64) {
        self.bcs.apply(&self.space, u, t, self.law.momentum());
    }

    /// Dofs overwritten by Dirichlet conditions.
    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        self.bcs.dirichlet_dofs().collect()
    }

    /// Cleans the magnetic components in place; `None` if cleaning is off.
    pub fn clean_divergence(&self, u: &mut Field) -> Result<Option<CleaningReport>> {
        let (Some(cleaner), Some([bx, by]), Some(space)) = (&self.cleaner, self.law.magnetic(), as_2d(&self.space))
        else {
            return Ok(None);
        };
        let mut x = u.comp(bx).to_vec();
        let mut y = u.comp(by).to_vec();
        let report = cleaner.clean(space, &mut x, &mut y)?;
        u.comp_mut(bx).copy_from_slice(&x);
        u.comp_mut(by).copy_from_slice(&y);
        Ok(Some(report))
    }

    /// Divergence error of the magnetic components.
    pub fn divergence_error(&self, u: &Field) -> Result<Option<DivergenceError>> {
        let (Some([bx, by]), Some(space)) = (self.law.magnetic(), as_2d(&self.space)) else {
            return Ok(None);
        };
        let report = match &self.cleaner {
            Some(c) => divergence_error_with(c, space, u.comp(bx), u.comp(by))?,
            None => divergence_error(space, u.comp(bx), u.comp(by))?,
        };
        Ok(Some(report))
    }

    pub fn compute_dt(&self, lambda: &[f64]) -> Result<f64> {
        match self.config.fixed_dt {
            Some(dt) => Ok(dt),
            None => compute_dt(lambda, &self.geometry.phi, self.config.cfl),
        }
    }

    /// Runs the time loop from `u0` at `t = 0`.
    pub fn run(&self, u0: Field, observer: &mut dyn StepObserver) -> Result<RunOutput> {
        self.run_from(TimeLoopState::new(u0), observer)
    }

    /// Continues the time loop from a given state up to the final time.
    pub fn run_from(&self, mut state: TimeLoopState, observer: &mut dyn StepObserver) -> Result<RunOutput> {
        let t_end = self.config.final_time;
        let mut steps = Vec::new();
        let mut lambda = self.lambda_max(&state.u).map_err(|e| e.at_step(state.step, state.time))?;
        let mut tau = self.compute_dt(&lambda).map_err(|e| e.at_step(state.step, state.time))?;
        let every = self.config.output_every.filter(|&n| n > 0);
        if every.is_some() {
            observer.output(&state)?;
        }
        while state.time < t_end && !is_at(state.time, t_end) {
            if state.step >= self.config.max_steps {
                return Err(Error::Config(format!("step limit {} reached at t = {}", self.config.max_steps, state.time)));
            }
            let (n, t) = (state.step, state.time);
            let tau_n = tau.min(t_end - t);
            let info = self.step(&mut state, &lambda, tau_n, observer).map_err(|e| e.at_step(n, t))?;
            if is_at(state.time, t_end) {
                state.time = t_end;
            }
            observer.stage(n, Stage::LambdaMax);
            lambda = self.lambda_max(&state.u).map_err(|e| e.at_step(n, state.time))?;
            observer.stage(n, Stage::TimeStep);
            tau = self.compute_dt(&lambda).map_err(|e| e.at_step(n, state.time))?;
            observer.step(&info, &state);
            if let Some(k) = every {
                if state.step % k == 0 || state.time >= t_end {
                    observer.output(&state)?;
                }
            }
            steps.push(info);
        }
        Ok(RunOutput { state, steps })
    }

    /// Residual, viscosity, Runge-Kutta, cleaning and boundary conditions of
    /// one step of size `tau` with `lambda` from the current state.
    pub fn step(
        &self,
        state: &mut TimeLoopState,
        lambda: &[f64],
        tau: f64,
        observer: &mut dyn StepObserver,
    ) -> Result<StepInfo> {
        if !(tau > 0.0) {
            return Err(Error::NonPositiveStep(tau));
        }
        let n = state.step;
        let eps_l = self.first_order_viscosity(lambda);
        observer.stage(n, Stage::Residual);
        let (eps, capped) = match self.config.viscosity {
            ViscosityMode::Residual => {
                let rv = self.residual_viscosity(state, lambda)?;
                observer.stage(n, Stage::Viscosity);
                let mut capped = 0usize;
                for (i, (r, l)) in rv.iter().zip(&eps_l).enumerate() {
                    if !(r <= l) {
                        return Err(Error::InvalidState(format!(
                            "residual viscosity {r:e} exceeds first-order bound {l:e} at node {i}"
                        )));
                    }
                    if r == l {
                        capped += 1;
                    }
                }
                (rv, capped)
            }
            ViscosityMode::FirstOrder => {
                observer.stage(n, Stage::Viscosity);
                (eps_l, lambda.len())
            }
            ViscosityMode::Off => {
                observer.stage(n, Stage::Viscosity);
                (vec![0.0; lambda.len()], 0)
            }
        };
        observer.stage(n, Stage::RungeKutta);
        let mut u = self.rk_step(&state.u, tau, &eps)?;
        observer.stage(n, Stage::Cleaning);
        let cleaning = self.clean_divergence(&mut u)?;
        observer.stage(n, Stage::BoundaryConditions);
        self.apply_bcs(&mut u, state.time + tau);
        let max_eps = eps.iter().copied().fold(0.0, f64::max);
        state.eps = ViscosityField {
            values: eps,
            time: state.time,
        };
        state.advance(u, tau);
        Ok(StepInfo {
            step: n,
            time: state.time,
            tau,
            max_eps,
            capped_fraction: capped as f64 / lambda.len().max(1) as f64,
            cleaning,
        })
    }
}

fn is_at(t: f64, target: f64) -> bool {
    (t - target).abs() <= 1e-12 * target.abs().max(1.0)
}

fn as_2d<const D: usize>(space: &LagrangeSpace<D>) -> Option<&LagrangeSpace<2>> {
    (space as &dyn std::any::Any).downcast_ref()
}

/// `τ = CFL / max_i λ_max,i Φ_i`.
pub fn compute_dt(lambda: &[f64], phi: &[f64], cfl: f64) -> Result<f64> {
    let mut m = 0.0f64;
    for (i, (l, p)) in lambda.iter().zip(phi).enumerate() {
        if !l.is_finite() {
            return Err(Error::InvalidState(format!("non-finite wave speed at node {i}")));
        }
        m = m.max(l * p);
    }
    if m > 0.0 {
        Ok(cfl / m)
    } else {
        Ok(f64::INFINITY)
    }
}
