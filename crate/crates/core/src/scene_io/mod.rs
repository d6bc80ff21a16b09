//! Scene files (JSON), result files (CSV) and the command line.

mod cli;
mod csvio;
pub mod schema;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use cli::cli_main;
pub use csvio::{read_charges, read_field, write_charges, write_field, ChargeRow};
pub use schema::SceneFile;

use crate::discrete::{Scene, SolveMethod};
use crate::greens::{BackgroundMedium, GreensEvaluator, GridSpec, IncidentField, RefractionProfile};
use crate::particle::{BoundaryCondition, Particle, ParticleShape, ShapeProperties, TriMesh};
use crate::{Error, Point3, Result};
use schema::{BcSpec, MethodSpec, ObservationSpec, ShapeSpec};

/// Default cells per axis for a constant-index box.
pub const DEFAULT_MEDIUM_DIMS: [usize; 3] = [8, 8, 8];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub method: SolveMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub corrected: bool,
}

/// A validated scene with its observation points and solver settings.
pub struct LoadedScene {
    pub scene: Scene,
    pub observation: Vec<Point3>,
    pub solver: SolverSettings,
    pub continuum_grid: Option<GridSpec>,
}

fn schema_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Schema(format!("`{key}`: {msg}"))
}

fn point(v: [f64; 3], key: &str) -> Result<Point3> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(schema_err(key, "coordinates must be finite"));
    }
    Ok(Point3::new(v[0], v[1], v[2]))
}

fn positive(v: f64, key: &str) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(schema_err(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn box_grid(min: [f64; 3], max: [f64; 3], dims: [usize; 3], key: &str) -> Result<GridSpec> {
    GridSpec::new(point(min, key)?, point(max, key)?, dims).map_err(|e| schema_err(key, e))
}

/// Parses scene JSON; relative mesh paths resolve against `base`.
pub fn parse_scene(text: &str, base: &Path) -> Result<LoadedScene> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    build_scene(&file, base)
}

pub fn load_scene(path: &Path) -> Result<LoadedScene> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read scene {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    parse_scene(&text, &base)
}

pub fn build_medium(spec: &schema::MediumSpec) -> Result<BackgroundMedium> {
    let k = positive(spec.k, "medium.k")?;
    let profile = match (&spec.n_const, &spec.n_grid) {
        (Some(_), Some(_)) => return Err(schema_err("medium", "give either n_const or n_grid, not both")),
        (None, None) => None,
        (n_const, n_grid) => {
            let b = spec
                .domain
                .as_ref()
                .ok_or_else(|| schema_err("medium.box", "required with n_const or n_grid"))?;
            Some(match (n_const, n_grid) {
                (Some(n), _) => {
                    let n = positive(*n, "medium.n_const")?;
                    let grid = box_grid(b.min, b.max, spec.dims.unwrap_or(DEFAULT_MEDIUM_DIMS), "medium.box")?;
                    RefractionProfile::constant(grid, n)?
                }
                (_, Some(g)) => {
                    if spec.dims.is_some() {
                        return Err(schema_err("medium.dims", "only used with n_const"));
                    }
                    let grid = box_grid(b.min, b.max, g.dims, "medium.box")?;
                    RefractionProfile::new(grid, g.values.clone()).map_err(|e| schema_err("medium.n_grid", e))?
                }
                _ => unreachable!(),
            })
        }
    };
    BackgroundMedium::new(k, profile)
}

fn observation_points(spec: &Option<ObservationSpec>) -> Result<Vec<Point3>> {
    Ok(match spec {
        None => Vec::new(),
        Some(ObservationSpec::Points(pts)) => pts
            .iter()
            .map(|p| point(*p, "observation.points"))
            .collect::<Result<_>>()?,
        Some(ObservationSpec::Lattice(l)) => {
            let (min, max) = (point(l.min, "observation.lattice")?, point(l.max, "observation.lattice")?);
            if l.dims.contains(&0) {
                return Err(schema_err("observation.lattice.dims", "must be positive"));
            }
            let coord = |a: usize, i: usize| {
                if l.dims[a] == 1 {
                    min[a]
                } else {
                    min[a] + (max[a] - min[a]) * i as f64 / (l.dims[a] - 1) as f64
                }
            };
            let mut out = Vec::with_capacity(l.dims.iter().product());
            for i in 0..l.dims[0] {
                for j in 0..l.dims[1] {
                    for k in 0..l.dims[2] {
                        out.push(Point3::new(coord(0, i), coord(1, j), coord(2, k)));
                    }
                }
            }
            out
        }
        Some(ObservationSpec::Sphere(s)) => fibonacci_sphere(
            &point(s.center, "observation.sphere.center")?,
            positive(s.radius, "observation.sphere.radius")?,
            s.count,
        ),
    })
}

/// `count` quasi-uniform points on a sphere (golden-angle spiral).
pub fn fibonacci_sphere(center: &Point3, radius: f64, count: usize) -> Vec<Point3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            center + Point3::new(r * phi.cos(), r * phi.sin(), z) * radius
        })
        .collect()
}

pub fn build_scene(file: &SceneFile, base: &Path) -> Result<LoadedScene> {
    let medium = build_medium(&file.medium)?;
    let order = file.medium.quadrature_order.unwrap_or(1);
    let evaluator = Arc::new(GreensEvaluator::build(medium, order)?);
    let direction = point(file.incident.direction, "incident.direction")?;
    if !(direction.norm() > 0.0) {
        return Err(schema_err("incident.direction", "must be a nonzero vector"));
    }
    let mut incident = IncidentField::plane_wave(&evaluator, direction)?;
    if let Some([re, im]) = file.incident.amplitude {
        incident = incident.with_amplitude(Complex64::new(re, im));
    }

    let mut meshes: HashMap<(PathBuf, u64), (ParticleShape, ShapeProperties)> = HashMap::new();
    let mut particles = Vec::with_capacity(file.particles.len());
    for (i, p) in file.particles.iter().enumerate() {
        let key = format!("particles[{i}]");
        let center = point(p.center, &format!("{key}.center"))?;
        let bc = match p.bc {
            BcSpec::Dirichlet => BoundaryCondition::Dirichlet,
            BcSpec::Neumann => BoundaryCondition::Neumann,
        };
        let particle = match &p.shape {
            ShapeSpec::Sphere { a } => Particle::sphere(center, positive(*a, &format!("{key}.shape.sphere.a"))?, bc)?,
            ShapeSpec::Ellipsoid { axes } => {
                for (n, v) in axes.iter().enumerate() {
                    positive(*v, &format!("{key}.shape.ellipsoid.axes[{n}]"))?;
                }
                Particle::new(center, ParticleShape::ellipsoid(*axes)?, bc)?
            }
            ShapeSpec::Mesh { path, scale } => {
                let scale = positive(scale.unwrap_or(1.0), &format!("{key}.shape.mesh.scale"))?;
                let full = base.join(path);
                let cache_key = (full.clone(), scale.to_bits());
                if !meshes.contains_key(&cache_key) {
                    let mesh = TriMesh::load(&full).map_err(|e| schema_err(&format!("{key}.shape.mesh.path"), e))?;
                    let shape = ParticleShape::mesh(mesh.scaled(scale));
                    let props = ShapeProperties::compute(&shape)?;
                    meshes.insert(cache_key.clone(), (shape, props));
                }
                let (shape, props) = meshes[&cache_key].clone();
                Particle::with_properties(center, shape, bc, props)?
            }
        };
        particles.push(particle);
    }
    let scene = Scene::new(evaluator, incident, particles)?;

    let s = &file.solver;
    positive(s.tol, "solver.tol")?;
    if s.max_iter == 0 {
        return Err(schema_err("solver.max_iter", "must be positive"));
    }
    let solver = SolverSettings {
        method: match s.method {
            MethodSpec::Direct => SolveMethod::Direct,
            MethodSpec::Iterative => SolveMethod::Iterative,
        },
        tol: s.tol,
        max_iter: s.max_iter,
        corrected: s.corrected,
    };
    let continuum_grid = file
        .continuum
        .as_ref()
        .map(|c| box_grid(c.grid.min, c.grid.max, c.grid.dims, "continuum.grid"))
        .transpose()?;
    Ok(LoadedScene {
        scene,
        observation: observation_points(&file.observation)?,
        solver,
        continuum_grid,
    })
}

/// Free-space scene file with `count` Dirichlet spheres of radius `a` at
/// seeded random, non-overlapping positions in `[-half, half]³`.
pub fn random_sphere_scene(seed: u64, count: usize, a: f64, half: f64, k: f64) -> Result<SceneFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<[f64; 3]> = Vec::with_capacity(count);
    let mut attempts = 0;
    while centers.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::InvalidInput("could not place non-overlapping spheres".into()));
        }
        let c = [0, 1, 2].map(|_| rng.gen_range(-half..half));
        let clear = centers.iter().all(|o| {
            let d: f64 = (0..3).map(|i| (o[i] - c[i]).powi(2)).sum::<f64>().sqrt();
            d > 4.0 * a
        });
        if clear {
            centers.push(c);
        }
    }
    Ok(SceneFile {
        medium: schema::MediumSpec {
            k,
            domain: None,
            n_const: None,
            dims: None,
            n_grid: None,
            quadrature_order: None,
        },
        incident: schema::IncidentSpec::default(),
        particles: centers
            .into_iter()
            .map(|c| schema::ParticleSpec {
                center: c,
                shape: ShapeSpec::Sphere { a },
                bc: BcSpec::Dirichlet,
            })
            .collect(),
        observation: None,
        solver: schema::SolverSpec::default(),
        continuum: None,
    })
}
