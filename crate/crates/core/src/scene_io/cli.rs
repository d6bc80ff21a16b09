use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{csvio, fibonacci_sphere, load_scene, LoadedScene};
use crate::continuum::{
    densities_from_ensemble, schrodinger_residual, solve_dirichlet_limit, solve_neumann_limit, EffectivePotential,
    LatticeStudy, LimitStatus, NeumannLimitOptions, ScalarDensity,
};
use crate::discrete::{
    assemble_system, eval_field, solve_direct, solve_iterative, ChargeSolution, SolveMethod, SolveStatus,
};
use crate::greens::{BackgroundMedium, GreensEvaluator, GridSpec, IncidentField};
use crate::oracle::PartialWaveSeries;
use crate::particle::{bem, capacitance, polarizability, volume, BoundaryCondition, ParticleShape, TriMesh};
use crate::{Error, Point3, Result};

#[derive(Parser, Debug)]
#[command(name = "manyscat", version, about = "Scattering by many small particles")]
struct Cli {
    /// Seed for randomized mesh and point generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacitance and volume of a particle shape.
    Capacitance(ShapeArgs),
    /// Polarizability tensor of a particle shape.
    Polarizability(ShapeArgs),
    /// Solve the finite-M system and write the field at the observation points.
    SolveDiscrete {
        scene: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write charges (or moments) here.
        #[arg(long)]
        charges: Option<PathBuf>,
    },
    /// Solve the continuum limit on the scene's `continuum.grid`.
    SolveContinuum {
        scene: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Discrete lattices against the continuum limit with fixed total capacitance.
    Compare {
        scene: PathBuf,
        /// Particles per axis of each lattice.
        #[arg(long, num_args = 1.., required = true)]
        lattice: Vec<usize>,
        #[arg(long, default_value_t = 2.0)]
        c_total: f64,
        /// Lattice box (defaults to the unit cube centered at the origin).
        #[arg(long, num_args = 6, value_names = ["XMIN", "YMIN", "ZMIN", "XMAX", "YMAX", "ZMAX"], allow_negative_numbers = true)]
        domain: Option<Vec<f64>>,
        /// Continuum cells per axis.
        #[arg(long, default_value_t = 24)]
        grid: usize,
        /// Observation sphere radius around the domain center.
        #[arg(long, default_value_t = 1.5)]
        radius: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Reference solutions.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Refinement studies.
    Convergence {
        #[arg(long, value_enum, default_value_t = Study::Capacitance)]
        study: Study,
        /// Number of refinement levels.
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Partial-wave far-field amplitude of a sphere, `k f(θ)` with `k = 1`.
    Sphere {
        #[arg(long)]
        ka: f64,
        #[arg(long, default_value = "dirichlet")]
        bc: BoundaryCondition,
        /// Number of equally spaced angles in `[0°, 180°]`.
        #[arg(long, default_value_t = 19)]
        theta_grid: usize,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Study {
    /// Icosphere capacitance against `4π`.
    Capacitance,
    /// Double-layer identity residual for a random density.
    Identity,
    /// Icosphere polarizability against `-3/2`.
    Polarizability,
    /// Residual of the continuum field in Schrödinger form under grid halving.
    Residual,
}

#[derive(Args, Debug)]
struct ShapeArgs {
    /// Mesh file (`v`/`f` lines).
    mesh: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["mesh", "ellipsoid"])]
    sphere: Option<f64>,
    #[arg(long, num_args = 3, value_names = ["A1", "A2", "A3"], conflicts_with = "mesh")]
    ellipsoid: Option<Vec<f64>>,
    /// Uniform scale applied to the mesh.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Discretize a sphere or ellipsoid with about this many panels and use
    /// the boundary-element path.
    #[arg(long)]
    panels: Option<usize>,
}

impl ShapeArgs {
    fn shape(&self) -> Result<ParticleShape> {
        let bad = |m: &str| Error::InvalidInput(m.to_string());
        match (&self.mesh, self.sphere, &self.ellipsoid, self.panels) {
            (Some(path), None, None, None) => Ok(ParticleShape::mesh(TriMesh::load(path)?.scaled(self.scale))),
            (Some(_), _, _, Some(_)) => Err(bad("--panels applies to --sphere or --ellipsoid")),
            (None, Some(a), None, None) => ParticleShape::sphere(a),
            (None, Some(a), None, Some(n)) => {
                Ok(ParticleShape::mesh(TriMesh::icosphere(a, TriMesh::frequency_for(n))?))
            }
            (None, None, Some(ax), panels) => {
                let axes = [ax[0], ax[1], ax[2]];
                match panels {
                    None => ParticleShape::ellipsoid(axes),
                    Some(n) => Ok(ParticleShape::mesh(TriMesh::ellipsoid(axes, TriMesh::frequency_for(n))?)),
                }
            }
            _ => Err(bad("give exactly one of a mesh path, --sphere or --ellipsoid")),
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Singular(_) | Error::SolverFailure(_) => 2,
        _ => 1,
    }
}

/// Runs the command line; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return 1;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let stdout = std::io::stdout();
    let result = pool.install(|| run(&cli, &mut stdout.lock()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Capacitance(args) => {
            let shape = args.shape()?;
            writeln!(out, "capacitance,volume")?;
            writeln!(out, "{:.16e},{:.16e}", capacitance(&shape)?, volume(&shape)?)?;
        }
        Command::Polarizability(args) => {
            let beta = polarizability(&args.shape()?)?;
            writeln!(out, "# provenance: {:?}", beta.provenance)?;
            for r in 0..3 {
                let row: Vec<String> = (0..3).map(|c| format!("{:.16e}", beta.matrix[(r, c)])).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Command::SolveDiscrete { scene, output, charges } => {
            let loaded = load_scene(scene)?;
            report(&loaded);
            let solution = solve_loaded(&loaded)?;
            let field = eval_field(&loaded.scene, &solution, &loaded.observation, loaded.solver.corrected)?;
            write_to(output, |w| csvio::write_field(w, &field))?;
            if let Some(path) = charges {
                write_to(path, |w| csvio::write_charges(w, &solution))?;
            }
        }
        Command::SolveContinuum { scene, output } => {
            let loaded = load_scene(scene)?;
            report(&loaded);
            let grid = loaded
                .continuum_grid
                .clone()
                .ok_or_else(|| Error::Schema("`continuum.grid`: required for solve-continuum".into()))?;
            let s = &loaded.scene;
            let dens = densities_from_ensemble(s, &grid)?;
            let medium = s.evaluator().medium();
            let field = if s.all(BoundaryCondition::Dirichlet) {
                solve_dirichlet_limit(medium, s.incident(), &dens.capacitance)?
            } else if s.all(BoundaryCondition::Neumann) {
                solve_neumann_limit(
                    medium,
                    s.incident(),
                    &dens.volume,
                    &dens.polarizability,
                    NeumannLimitOptions::default(),
                )?
            } else {
                return Err(Error::Unsupported(
                    "continuum limit of a mixed Dirichlet/Neumann ensemble".into(),
                ));
            };
            if field.diagnostics.status == LimitStatus::Diverged {
                return Err(Error::SolverFailure(format!(
                    "continuum fixed point did not converge in {} iterations",
                    field.diagnostics.iterations
                )));
            }
            let samples = field.field_at(&loaded.observation)?;
            write_to(output, |w| csvio::write_field(w, &samples))?;
        }
        Command::Compare {
            scene,
            lattice,
            c_total,
            domain,
            grid,
            radius,
            points,
        } => {
            let loaded = load_scene(scene)?;
            let (min, max) = match domain {
                Some(d) => (Point3::new(d[0], d[1], d[2]), Point3::new(d[3], d[4], d[5])),
                None => (Point3::repeat(-0.5), Point3::repeat(0.5)),
            };
            let domain = GridSpec::new(min, max, [*grid; 3])?;
            let center = (min + max) / 2.0;
            let study = LatticeStudy {
                evaluator: loaded.scene.evaluator().clone(),
                incident: loaded.scene.incident().clone(),
                domain,
                total_capacitance: *c_total,
                observation: fibonacci_sphere(&center, *radius, *points),
                direct_limit: 1000,
                tol: 1e-12,
            };
            let rows = study.run(lattice)?;
            writeln!(out, "per_axis,particles,margin,iterations,rel_l2_total,rel_l2_scattered,volume_fraction")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{:.6e},{},{:.6e},{:.6e},{:.6e}",
                    r.per_axis,
                    r.particles,
                    r.contraction_margin,
                    r.iterations,
                    r.rel_l2_total,
                    r.rel_l2_scattered,
                    r.volume_fraction
                )?;
            }
        }
        Command::Oracle(OracleCommand::Sphere { ka, bc, theta_grid }) => {
            if *theta_grid == 0 {
                return Err(Error::InvalidInput("--theta-grid must be positive".into()));
            }
            let series = PartialWaveSeries::auto(*ka, *bc)?;
            writeln!(out, "theta_deg,re_f,im_f,abs_f")?;
            for i in 0..*theta_grid {
                let deg = if *theta_grid == 1 {
                    0.0
                } else {
                    180.0 * i as f64 / (*theta_grid - 1) as f64
                };
                let f = series.amplitude(deg.to_radians());
                writeln!(out, "{deg:.6},{:.16e},{:.16e},{:.16e}", f.re, f.im, f.norm())?;
            }
        }
        Command::Convergence { study, levels } => convergence(*study, *levels, cli.seed, out)?,
    }
    Ok(())
}

fn report(loaded: &LoadedScene) {
    let d = loaded.scene.diagnostics();
    log::info!(
        "M = {}, a = {:.3e}, d = {:.3e}, ka = {:.3e}, a/d = {:.3e}",
        d.m,
        d.a,
        d.d,
        d.ka,
        d.a_over_d
    );
}

fn solve_loaded(loaded: &LoadedScene) -> Result<ChargeSolution> {
    let system = assemble_system(&loaded.scene)?;
    let solution = match loaded.solver.method {
        SolveMethod::Direct => solve_direct(&system)?,
        SolveMethod::Iterative => solve_iterative(&system, loaded.solver.max_iter, loaded.solver.tol)?,
    };
    if solution.diagnostics.status == SolveStatus::Diverged {
        return Err(Error::SolverFailure(format!(
            "fixed-point iteration diverged after {} steps (contraction margin {:.3})",
            solution.diagnostics.iterations, solution.diagnostics.contraction_margin
        )));
    }
    Ok(solution)
}

fn write_to(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn convergence(study: Study, levels: usize, seed: u64, out: &mut dyn Write) -> Result<()> {
    if levels == 0 {
        return Err(Error::InvalidInput("--levels must be positive".into()));
    }
    match study {
        Study::Capacitance | Study::Identity | Study::Polarizability => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            writeln!(out, "panels,value,error")?;
            for level in 1..=levels {
                let mesh = TriMesh::icosphere(1.0, 2 * level)?;
                let (value, error) = match study {
                    Study::Capacitance => {
                        let c = bem::capacitance_bem(&mesh)?;
                        (c, (c - 4.0 * std::f64::consts::PI).abs() / (4.0 * std::f64::consts::PI))
                    }
                    Study::Identity => {
                        let sigma: Vec<f64> = (0..mesh.panel_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let r = bem::double_layer_identity_residual(&mesh, &sigma)?;
                        (r, r)
                    }
                    _ => {
                        let b = bem::polarizability_bem(&mesh, &Point3::zeros())?;
                        let mean = b.trace() / 3.0;
                        (mean, (mean + 1.5).abs() / 1.5)
                    }
                };
                writeln!(out, "{},{value:.10e},{error:.6e}", mesh.panel_count())?;
            }
        }
        Study::Residual => {
            let medium = BackgroundMedium::homogeneous(1.0)?;
            let ev = GreensEvaluator::build(medium.clone(), 1)?;
            let incident = IncidentField::plane_wave(&ev, Point3::new(0.0, 0.0, 1.0))?;
            writeln!(out, "cells,h,residual")?;
            for level in 0..levels {
                let n = 6 << level;
                let grid = GridSpec::cube(Point3::zeros(), 0.5, n)?;
                let density = ScalarDensity::from_fn(grid.clone(), bump)?;
                let field = solve_dirichlet_limit(&medium, &incident, &density)?;
                let potential = EffectivePotential::new(&medium, &density);
                let r = schrodinger_residual(&grid, &field.nodal_field().u, &medium, &potential)?;
                writeln!(out, "{n},{:.6e},{:.6e}", grid.max_spacing(), r.residual)?;
            }
        }
    }
    Ok(())
}

/// Smooth compactly supported profile `2 Π sin⁴(π(x_i + 1/2))` on the unit cube.
pub(crate) fn bump(p: &Point3) -> f64 {
    let s = |t: f64| (std::f64::consts::PI * (t + 0.5)).sin().powi(4);
    2.0 * s(p.x) * s(p.y) * s(p.z)
}

