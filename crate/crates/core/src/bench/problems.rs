use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elements::LagrangeSpace;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh::{perturbed_rectangle, rectangle, BoxTags, Mesh};
use crate::physics::{ConservationLaw, Mhd2d, Primitive};
use crate::solver::{BoundaryCondition, Solver, SolverConfig};

/// Tunable parameters of the registry problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub seed: u64,
    /// Vortex background pressure.
    pub vortex_p0: f64,
    /// Horizontal field of the Kelvin-Helmholtz run.
    pub kh_bx: f64,
    pub kh_gamma: f64,
    pub blast_radius: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            seed: 0,
            vortex_p0: 1.0,
            kh_bx: 0.2,
            kh_gamma: 5.0 / 3.0,
            blast_radius: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Vortex { p0: f64 },
    BrioWu,
    OrszagTang,
    KelvinHelmholtz { bx: f64, seed: u64 },
    Blast { radius: f64 },
}

/// How the domain boundary is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    /// Inflow/outflow states fixed on the left and right, periodic in y.
    DirichletX,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub kind: ProblemKind,
    /// `[[x0, x1], [y0, y1]]`.
    pub domain: [[f64; 2]; 2],
    pub gamma: f64,
    pub cfl: f64,
    pub final_time: f64,
    pub boundary: BoundaryKind,
    pub has_exact: bool,
    pub notes: &'static str,
}

pub const VORTEX_U0: [f64; 2] = [1.0, 1.0];
pub const VORTEX_B0: [f64; 2] = [0.1, 0.1];
pub const VORTEX_MU: f64 = 1.0;

pub const BRIO_WU_LEFT: Primitive = Primitive {
    rho: 1.0,
    u: [0.0, 0.0],
    p: 1.0,
    b: [0.75, 1.0],
};
pub const BRIO_WU_RIGHT: Primitive = Primitive {
    rho: 0.125,
    u: [0.0, 0.0],
    p: 0.1,
    b: [0.75, -1.0],
};

pub const BLAST_AMBIENT_PRESSURE: f64 = 0.1;
pub const BLAST_INNER_PRESSURE: f64 = 1000.0;

/// All benchmark problems with default parameters.
pub fn registry() -> BTreeMap<&'static str, ProblemSpec> {
    registry_with(ProblemParams::default())
}

pub fn registry_with(params: ProblemParams) -> BTreeMap<&'static str, ProblemSpec> {
    let specs = [
        ProblemSpec {
            name: "vortex",
            kind: ProblemKind::Vortex { p0: params.vortex_p0 },
            domain: [[-10.0, 10.0], [-10.0, 10.0]],
            gamma: 5.0 / 3.0,
            cfl: 0.1,
            final_time: 0.05,
            boundary: BoundaryKind::Periodic,
            has_exact: true,
            notes: "translating vortex; exact solution is the initial profile shifted by u0 t",
        },
        ProblemSpec {
            name: "brio-wu",
            kind: ProblemKind::BrioWu,
            domain: [[0.0, 1.0], [0.0, 1.0]],
            gamma: 2.0,
            cfl: 0.3,
            final_time: 0.1,
            boundary: BoundaryKind::DirichletX,
            has_exact: false,
            notes: "shock tube on a one-row strip of height h, periodic in y; left state for x < 0.5",
        },
        ProblemSpec {
            name: "orszag-tang",
            kind: ProblemKind::OrszagTang,
            domain: [[0.0, 1.0], [0.0, 1.0]],
            gamma: 5.0 / 3.0,
            cfl: 0.3,
            final_time: 0.5,
            boundary: BoundaryKind::Periodic,
            has_exact: false,
            notes: "final time 0.5 or 1",
        },
        ProblemSpec {
            name: "kelvin-helmholtz",
            kind: ProblemKind::KelvinHelmholtz {
                bx: params.kh_bx,
                seed: params.seed,
            },
            domain: [[-0.5, 0.5], [-0.5, 0.5]],
            gamma: params.kh_gamma,
            cfl: 0.4,
            final_time: 6.0,
            boundary: BoundaryKind::Periodic,
            has_exact: false,
            notes: "shear layers at |y| = 0.25 with seeded uniform velocity noise of amplitude 0.005",
        },
        ProblemSpec {
            name: "blast",
            kind: ProblemKind::Blast {
                radius: params.blast_radius,
            },
            domain: [[-0.5, 0.5], [-0.5, 0.5]],
            gamma: 1.4,
            cfl: 0.2,
            final_time: 0.01,
            boundary: BoundaryKind::Periodic,
            has_exact: false,
            notes: "pressure jump of 10000 inside a circle of configurable radius",
        },
    ];
    specs.into_iter().map(|s| (s.name, s)).collect()
}

pub fn problem(name: &str) -> Result<ProblemSpec> {
    problem_with(name, ProblemParams::default())
}

pub fn problem_with(name: &str, params: ProblemParams) -> Result<ProblemSpec> {
    registry_with(params)
        .remove(name)
        .ok_or_else(|| Error::UnknownProblem(name.to_owned()))
}

/// Translating vortex at time `t` for background pressure `p0`.
pub fn vortex_state(x: [f64; 2], t: f64, p0: f64) -> Primitive {
    let r1 = x[0] - VORTEX_U0[0] * t;
    let r2 = x[1] - VORTEX_U0[1] * t;
    let r2sq = r1 * r1 + r2 * r2;
    let e = ((1.0 - r2sq) / 2.0).exp();
    let du = VORTEX_MU / (PI * 2f64.sqrt()) * e;
    let db = VORTEX_MU / (2.0 * PI) * e;
    let dp = -VORTEX_MU * VORTEX_MU * (1.0 + r2sq) * (1.0 - r2sq).exp() / (8.0 * PI * PI);
    Primitive {
        rho: 1.0,
        u: [VORTEX_U0[0] - du * r2, VORTEX_U0[1] + du * r1],
        p: p0 + dp,
        b: [VORTEX_B0[0] - db * r2, VORTEX_B0[1] + db * r1],
    }
}

pub fn orszag_tang_state(x: [f64; 2]) -> Primitive {
    let s = (4.0 * PI).sqrt();
    Primitive {
        rho: 25.0 / (36.0 * PI),
        u: [-(2.0 * PI * x[1]).sin(), (2.0 * PI * x[0]).sin()],
        p: 5.0 / (12.0 * PI),
        b: [-(2.0 * PI * x[1]).sin() / s, (4.0 * PI * x[0]).sin() / s],
    }
}

impl ProblemSpec {
    pub fn law(&self) -> Mhd2d {
        Mhd2d::new(self.gamma)
    }

    /// Deterministic part of the initial data.
    pub fn initial_state(&self, x: [f64; 2]) -> Primitive {
        match self.kind {
            ProblemKind::Vortex { p0 } => vortex_state(x, 0.0, p0),
            ProblemKind::BrioWu => {
                if x[0] < 0.5 {
                    BRIO_WU_LEFT
                } else {
                    BRIO_WU_RIGHT
                }
            }
            ProblemKind::OrszagTang => orszag_tang_state(x),
            ProblemKind::KelvinHelmholtz { bx, .. } => {
                let inner = x[1].abs() <= 0.25;
                Primitive {
                    rho: if inner { 2.0 } else { 1.0 },
                    u: [if inner { 0.5 } else { -0.5 }, 0.0],
                    p: 2.5,
                    b: [bx, 0.0],
                }
            }
            ProblemKind::Blast { radius } => Primitive {
                rho: 1.0,
                u: [0.0, 0.0],
                p: if x[0].hypot(x[1]) <= radius {
                    BLAST_INNER_PRESSURE
                } else {
                    BLAST_AMBIENT_PRESSURE
                },
                b: [100.0 / (4.0 * PI).sqrt(), 0.0],
            },
        }
    }

    pub fn exact(&self, x: [f64; 2], t: f64) -> Option<Primitive> {
        match self.kind {
            ProblemKind::Vortex { p0 } => Some(vortex_state(x, t, p0)),
            _ => None,
        }
    }

    /// Mesh with `n` cells per unit direction of the domain (for the
    /// Brio-Wu strip, `n` cells along x and a single row of height `1/n`).
    /// `perturbed` selects random diagonals and jittered interior vertices.
    pub fn mesh(&self, n: usize, perturbed: bool) -> Result<Mesh<2>> {
        let [xr, yr] = self.domain;
        let (ny, yr) = match self.kind {
            ProblemKind::BrioWu => (1, [0.0, (xr[1] - xr[0]) / n as f64]),
            _ => (n, yr),
        };
        let mesh = if perturbed {
            perturbed_rectangle(n, ny, xr, yr, 0.2, self.kind_seed())?
        } else {
            rectangle(n, ny, xr, yr)?
        };
        let periods = match self.boundary {
            BoundaryKind::Periodic => [Some(xr[1] - xr[0]), Some(yr[1] - yr[0])],
            BoundaryKind::DirichletX => [None, Some(yr[1] - yr[0])],
        };
        mesh.with_periodicity(periods)
    }

    fn kind_seed(&self) -> u64 {
        match self.kind {
            ProblemKind::KelvinHelmholtz { seed, .. } => seed,
            _ => 0x5eed,
        }
    }

    pub fn boundary_conditions(&self) -> Vec<BoundaryCondition<2>> {
        match self.boundary {
            BoundaryKind::Periodic => Vec::new(),
            BoundaryKind::DirichletX => {
                let law = self.law();
                let spec = self.clone();
                vec![BoundaryCondition::Dirichlet {
                    tags: vec![BoxTags::LEFT, BoxTags::RIGHT],
                    data: Arc::new(move |x, _t| law.conserved(&spec.initial_state(x)).to_vec()),
                }]
            }
        }
    }

    /// Nodal interpolant of the initial data; the Kelvin-Helmholtz noise is
    /// drawn per dof in dof order from the seeded generator.
    pub fn initial_field(&self, space: &LagrangeSpace<2>) -> Result<Field> {
        let law = self.law();
        let mut rng = match self.kind {
            ProblemKind::KelvinHelmholtz { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let mut states = Vec::with_capacity(space.ndof());
        for i in 0..space.ndof() {
            let mut w = self.initial_state(space.dof_coord(i));
            if let Some(rng) = rng.as_mut() {
                w.u[0] += rng.gen_range(-0.005..=0.005);
                w.u[1] += rng.gen_range(-0.005..=0.005);
            }
            let u = law.conserved(&w);
            law.check_state(&u)
                .map_err(|e| Error::InvalidState(format!("{} initial data at dof {i}: {e}", self.name)))?;
            states.push(u);
        }
        Ok(Field::from_nodes(law.ncomp(), states.len(), |i| states[i].to_vec()))
    }

    /// Solver configuration with the problem's CFL and final time.
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            cfl: self.cfl,
            final_time: self.final_time,
            ..SolverConfig::default()
        }
    }

    pub fn solver(&self, mesh: &Mesh<2>, degree: usize, config: SolverConfig) -> Result<Solver<2, Mhd2d>> {
        let space = LagrangeSpace::new(mesh, degree)?;
        Solver::new(space, self.law(), &self.boundary_conditions(), config)
    }
}
