//! Command-line driver for the benchmark problems and invariant suites.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use nodal_mhd::bench::{
    problem_with, rate_table, schlieren, strip_errors, strip_reference, write_metadata, write_mhd_vtu,
    write_nodal_csv, write_rate_csv, ProblemParams, ProblemSpec,
};
use nodal_mhd::elements::{LagrangeSpace, NodalGeometry};
use nodal_mhd::mesh::{interval, rectangle};
use nodal_mhd::physics::mhd::RHO;
use nodal_mhd::scalar::{cfl_constant, dmp_suite, trapezoid_identity};
use nodal_mhd::solver::{
    DivergenceError, RkScheme, Solver, SolverConfig, StepInfo, StepObserver, TimeLoopState, ViscosityMode,
};

#[derive(Parser)]
#[command(name = "nodal-mhd", version, about = "Nodal artificial viscosity for ideal MHD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Viscosity {
    Residual,
    FirstOrder,
    Off,
}

impl From<Viscosity> for ViscosityMode {
    fn from(v: Viscosity) -> Self {
        match v {
            Viscosity::Residual => ViscosityMode::Residual,
            Viscosity::FirstOrder => ViscosityMode::FirstOrder,
            Viscosity::Off => ViscosityMode::Off,
        }
    }
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Polynomial degree of the Lagrange space.
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// CFL number; defaults to the problem's value.
    #[arg(long)]
    cfl: Option<f64>,
    /// Final time; defaults to the problem's value.
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Viscosity::Residual)]
    viscosity: Viscosity,
    /// Runge-Kutta scheme: rk4, ssprk3 or euler.
    #[arg(long, default_value = "rk4")]
    scheme: String,
    /// Random diagonals and jittered interior vertices.
    #[arg(long)]
    perturbed: bool,
    #[arg(long)]
    no_cleaning: bool,
    /// Blast radius.
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    /// Horizontal field of the Kelvin-Helmholtz run.
    #[arg(long, default_value_t = 0.2)]
    kh_bx: f64,
}

impl Common {
    fn spec(&self, name: &str) -> Result<ProblemSpec> {
        let params = ProblemParams {
            seed: self.seed,
            blast_radius: self.radius,
            kh_bx: self.kh_bx,
            ..ProblemParams::default()
        };
        Ok(problem_with(name, params)?)
    }

    fn config(&self, spec: &ProblemSpec) -> Result<SolverConfig> {
        let scheme = RkScheme::by_name(&self.scheme).with_context(|| format!("unknown scheme '{}'", self.scheme))?;
        Ok(SolverConfig {
            cfl: self.cfl.unwrap_or(spec.cfl),
            final_time: self.tfinal.unwrap_or(spec.final_time),
            scheme,
            viscosity: self.viscosity.into(),
            cleaning: !self.no_cleaning,
            ..SolverConfig::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Runs one benchmark and writes fields, metadata and diagnostics.
    Run {
        problem: String,
        /// Cells per unit direction of the domain.
        #[arg(long, default_value_t = 32)]
        res: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write fields every this many steps.
        #[arg(long)]
        every: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs a mesh sequence and writes the convergence table.
    Converge {
        problem: String,
        /// Coarsest resolution.
        #[arg(long, default_value_t = 16)]
        res: usize,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Resolution of the self-reference for problems without an exact solution.
        #[arg(long, default_value_t = 1440)]
        reference: usize,
        /// Output CSV; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized discrete maximum principle suite for the scalar scheme.
    Scalar {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Fast invariant checks; exits non-zero on any failure.
    Check,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            problem,
            res,
            out,
            every,
            common,
        } => run_problem(&problem, res, &out, every, &common).map(|_| true),
        Command::Converge {
            problem,
            res,
            levels,
            reference,
            out,
            common,
        } => converge(&problem, res, levels, reference, out.as_deref(), &common).map(|_| true),
        Command::Scalar { trials, steps, seed } => {
            let r = dmp_suite(trials, steps, seed)?;
            println!("trials {} steps {}", r.trials, r.steps);
            println!("dmp violations {}", r.violations);
            println!("global bound violations {}", r.bound_violations);
            println!("min coefficient {:e}", r.min_coefficient);
            println!("max row sum error {:e}", r.max_row_sum_error);
            println!("inviscid control violations {}", r.control_violations);
            Ok(r.violations == 0 && r.control_violations > 0)
        }
        Command::Check => check(),
    }
}

/// Records δ(t) and cleaning reports; writes intermediate frames on request.
struct RunObserver<'a> {
    solver: &'a Solver<2, nodal_mhd::physics::Mhd2d>,
    out: &'a Path,
    divergence: Vec<(f64, DivergenceError)>,
    cleaning_increases: usize,
    frame: usize,
    error: Option<anyhow::Error>,
}

impl StepObserver for RunObserver<'_> {
    fn step(&mut self, info: &StepInfo, state: &TimeLoopState) {
        if let Some(c) = info.cleaning {
            if c.div_after > c.div_before {
                self.cleaning_increases += 1;
            }
        }
        match self.solver.divergence_error(&state.u) {
            Ok(Some(d)) => self.divergence.push((state.time, d)),
            Ok(None) => {}
            Err(e) => self.error = Some(e.into()),
        }
    }

    fn output(&mut self, state: &TimeLoopState) -> nodal_mhd::Result<()> {
        let path = self.out.join(format!("frame_{:04}.vtu", self.frame));
        self.frame += 1;
        let w = BufWriter::new(File::create(path)?);
        write_mhd_vtu(&self.solver.space, &self.solver.law, &state.u, &[("viscosity", &state.eps.values)], w)
    }
}

fn run_problem(name: &str, res: usize, out: &Path, every: Option<usize>, common: &Common) -> Result<()> {
    let spec = common.spec(name)?;
    let mut config = common.config(&spec)?;
    config.output_every = every;
    let mesh = spec.mesh(res, common.perturbed)?;
    let solver = spec.solver(&mesh, common.degree, config)?;
    let u0 = spec.initial_field(&solver.space)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let start = Instant::now();
    let mut obs = RunObserver {
        solver: &solver,
        out,
        divergence: Vec::new(),
        cleaning_increases: 0,
        frame: 0,
        error: None,
    };
    if let Some(d) = solver.divergence_error(&u0)? {
        obs.divergence.push((0.0, d));
    }
    let result = solver.run(u0, &mut obs)?;
    if let Some(e) = obs.error.take() {
        return Err(e);
    }
    let wall = start.elapsed().as_secs_f64();
    let state = &result.state;

    let rho = state.u.comp(RHO);
    let sigma = schlieren(&solver.space, rho, 5.0)?;
    let w = BufWriter::new(File::create(out.join("final.vtu"))?);
    write_mhd_vtu(
        &solver.space,
        &solver.law,
        &state.u,
        &[("viscosity", &state.eps.values), ("schlieren", &sigma)],
        w,
    )?;
    write_nodal_csv(&solver.space, &solver.law, &state.u, BufWriter::new(File::create(out.join("final.csv"))?))?;

    if !obs.divergence.is_empty() {
        let mut w = BufWriter::new(File::create(out.join("divergence.csv"))?);
        writeln!(w, "time,delta,div_norm,curl_norm,degenerate_curl")?;
        for (t, d) in &obs.divergence {
            writeln!(w, "{t:.17e},{:.17e},{:.17e},{:.17e},{}", d.delta, d.div_norm, d.curl_norm, u8::from(d.degenerate_curl))?;
        }
        w.flush()?;
    }

    let max_capped = result.steps.iter().map(|s| s.capped_fraction).fold(0.0, f64::max);
    let meta = [
        ("problem", spec.name.to_owned()),
        ("degree", common.degree.to_string()),
        ("resolution", res.to_string()),
        ("dofs", solver.space.ndof().to_string()),
        ("cfl", solver.config.cfl.to_string()),
        ("final_time", state.time.to_string()),
        ("seed", common.seed.to_string()),
        ("perturbed", common.perturbed.to_string()),
        ("viscosity", format!("{:?}", solver.config.viscosity)),
        ("steps", result.steps.len().to_string()),
        ("wall_time_s", format!("{wall:.3}")),
        ("max_capped_fraction", max_capped.to_string()),
        ("cleaning_increases", obs.cleaning_increases.to_string()),
    ];
    write_metadata(&meta, BufWriter::new(File::create(out.join("metadata.json"))?))?;
    println!(
        "{}: {} steps to t = {} on {} dofs in {wall:.1} s",
        spec.name,
        result.steps.len(),
        state.time,
        solver.space.ndof()
    );
    Ok(())
}

fn converge(
    name: &str,
    res: usize,
    levels: usize,
    reference: usize,
    out: Option<&Path>,
    common: &Common,
) -> Result<()> {
    if levels < 2 {
        bail!("need at least two levels");
    }
    let spec = common.spec(name)?;
    let config = common.config(&spec)?;
    let resolutions: Vec<usize> = (0..levels).map(|k| res << k).collect();
    let mut comments = vec![format!(
        "problem {} degree {} cfl {} viscosity {:?}",
        spec.name, common.degree, config.cfl, config.viscosity
    )];
    let (reports, dim) = if spec.has_exact {
        let r = nodal_mhd::bench::converge(&spec, common.degree, &resolutions, common.perturbed, &config)?;
        (r, 2)
    } else if spec.name == "brio-wu" {
        comments.push(format!("self-reference: {} nodes along x", reference + 1));
        if common.degree != 1 {
            bail!("strip self-convergence uses P1");
        }
        let reference_config = SolverConfig {
            viscosity: ViscosityMode::Residual,
            ..config.clone()
        };
        let profile = strip_reference(&spec, reference, reference_config)?;
        (strip_errors(&spec, &resolutions, &profile, &config)?, 1)
    } else {
        bail!("problem '{}' has neither an exact solution nor a self-reference", spec.name);
    };
    let rows = rate_table(&reports, dim);
    match out {
        Some(path) => write_rate_csv(&rows, &comments, BufWriter::new(File::create(path)?))?,
        None => write_rate_csv(&rows, &comments, std::io::stdout().lock())?,
    }
    Ok(())
}

fn check() -> Result<bool> {
    let mut all = true;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all &= ok;
    };

    let (c1, c2) = (cfl_constant(1, 1.0), cfl_constant(2, 1.0));
    report("cfl constants", c1 == 0.5 && (c2 - 1.0 / 3.0).abs() < 1e-15, format!("{c1}, {c2}"));

    let mesh = rectangle(4, 4, [0.0, 1.0], [0.0, 1.0])?;
    let space = LagrangeSpace::new(&mesh, 1)?;
    let mut worst = 0.0f64;
    for c in 0..space.num_cells() {
        let (lhs, rhs) = trapezoid_identity(&space, c, &[0.3, 1.1, 0.7], 0, 1)?;
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
    }
    report("trapezoid identity", worst < 1e-12, format!("max relative defect {worst:e}"));

    let n = 16;
    let line = interval(n, 0.0, 1.0)?;
    let geometry = NodalGeometry::new(&LagrangeSpace::new(&line, 1)?)?;
    let h = 1.0 / n as f64;
    let lf = (1..n)
        .map(|i| (geometry.scale(i) * h * h - 0.5 * h).abs())
        .fold(0.0, f64::max);
    report("Lax-Friedrichs coefficient", lf < 1e-12, format!("max defect {lf:e}"));

    let r = dmp_suite(20, 5, 2024)?;
    report(
        "scalar DMP",
        r.violations == 0 && r.control_violations > 0,
        format!("{} violations, {} control violations", r.violations, r.control_violations),
    );

    let spec = common_spec("orszag-tang")?;
    let mut config = spec.config();
    let solver = spec.solver(&spec.mesh(16, false)?, 1, config.clone())?;
    let u0 = spec.initial_field(&solver.space)?;
    let tau = solver.compute_dt(&solver.lambda_max(&u0)?)?;
    config.fixed_dt = Some(tau);
    config.final_time = 20.0 * tau;
    let solver = Solver::new(solver.space, solver.law, &[], config)?;
    let out = solver.run(u0.clone(), &mut ())?;
    let m = solver.space.lumped_mass();
    let drift = (0..3)
        .map(|c| {
            let a: f64 = u0.comp(c).iter().zip(&m).map(|(x, w)| x * w).sum();
            let s: f64 = u0.comp(c).iter().zip(&m).map(|(x, w)| x.abs() * w).sum();
            let b: f64 = out.state.u.comp(c).iter().zip(&m).map(|(x, w)| x * w).sum();
            (a - b).abs() / s
        })
        .fold(0.0, f64::max);
    report("periodic conservation", drift < 1e-9, format!("max relative drift {drift:e} over 20 steps"));
    Ok(all)
}

fn common_spec(name: &str) -> Result<ProblemSpec> {
    Ok(problem_with(name, ProblemParams::default())?)
}
