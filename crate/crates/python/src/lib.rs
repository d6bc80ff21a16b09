use std::path::Path;

use manyscat::continuum::{densities_from_ensemble, solve_dirichlet_limit};
use manyscat::discrete::{self, ChargeSolution, FieldGrid, SolveStatus};
use manyscat::greens::GridSpec;
use manyscat::oracle::sphere_exact_amplitude;
use manyscat::particle::{self, BoundaryCondition, ParticleShape};
use manyscat::scene_io::load_scene;
use manyscat::{Error, Point3};
use num_complex::Complex64;
use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Singular(_) | Error::SolverFailure(_) => PyRuntimeError::new_err(e.to_string()),
        Error::Unsupported(_) => PyNotImplementedError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point(p: [f64; 3]) -> Point3 {
    Point3::new(p[0], p[1], p[2])
}

fn parse_bc(bc: &str) -> PyResult<BoundaryCondition> {
    bc.parse().map_err(to_py)
}

type FieldRow = (Complex64, Complex64, u8);

fn rows(field: FieldGrid) -> Vec<FieldRow> {
    field
        .u
        .into_iter()
        .zip(field.u0)
        .zip(field.flags)
        .map(|((u, u0), f)| (u, u0, f.code()))
        .collect()
}

/// A small particle with its precomputed capacitance, volume and
/// polarizability.
#[pyclass(module = "manyscat_py", frozen)]
#[derive(Clone)]
struct Particle {
    inner: manyscat::particle::Particle,
}

#[pymethods]
impl Particle {
    #[staticmethod]
    #[pyo3(signature = (center, a, bc = "dirichlet"))]
    fn sphere(center: [f64; 3], a: f64, bc: &str) -> PyResult<Self> {
        let inner = manyscat::particle::Particle::sphere(point(center), a, parse_bc(bc)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (center, axes, bc = "dirichlet"))]
    fn ellipsoid(center: [f64; 3], axes: [f64; 3], bc: &str) -> PyResult<Self> {
        let shape = ParticleShape::ellipsoid(axes).map_err(to_py)?;
        let inner = manyscat::particle::Particle::new(point(center), shape, parse_bc(bc)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn center(&self) -> [f64; 3] {
        let c = self.inner.center();
        [c.x, c.y, c.z]
    }

    #[getter]
    fn bc(&self) -> String {
        self.inner.bc().to_string()
    }

    #[getter]
    fn capacitance(&self) -> f64 {
        self.inner.capacitance()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    #[getter]
    fn polarizability(&self) -> [[f64; 3]; 3] {
        let b = self.inner.polarizability();
        std::array::from_fn(|i| std::array::from_fn(|j| b[(i, j)]))
    }

    fn __repr__(&self) -> String {
        let c = self.center();
        format!(
            "Particle(center=[{}, {}, {}], bc={}, capacitance={:.6e})",
            c[0],
            c[1],
            c[2],
            self.bc(),
            self.capacitance()
        )
    }
}

/// Solution of the finite particle system.
#[pyclass(module = "manyscat_py", frozen)]
struct Solution {
    inner: ChargeSolution,
}

#[pymethods]
impl Solution {
    /// Per-particle unknowns: `[q]` for Dirichlet, `[u, du/dx, du/dy, du/dz]`
    /// for Neumann.
    fn unknowns(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.len()).map(|m| self.inner.block(m).to_vec()).collect()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.diagnostics.status == SolveStatus::Converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.diagnostics.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.diagnostics.residual
    }

    #[getter]
    fn contraction_margin(&self) -> f64 {
        self.inner.diagnostics.contraction_margin
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Particles in a background medium under plane-wave illumination.
#[pyclass(module = "manyscat_py", frozen)]
struct Scene {
    inner: discrete::Scene,
    observation: Vec<Point3>,
}

#[pymethods]
impl Scene {
    #[new]
    #[pyo3(signature = (particles, k = 1.0, direction = [0.0, 0.0, 1.0]))]
    fn new(particles: Vec<Particle>, k: f64, direction: [f64; 3]) -> PyResult<Self> {
        let particles = particles.into_iter().map(|p| p.inner).collect();
        let inner = discrete::Scene::homogeneous(k, point(direction), particles).map_err(to_py)?;
        Ok(Self {
            inner,
            observation: Vec::new(),
        })
    }

    /// Reads a JSON scene file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let loaded = load_scene(Path::new(path)).map_err(to_py)?;
        Ok(Self {
            inner: loaded.scene,
            observation: loaded.observation,
        })
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k()
    }

    #[getter]
    fn observation(&self) -> Vec<[f64; 3]> {
        self.observation.iter().map(|p| [p.x, p.y, p.z]).collect()
    }

    fn particles(&self) -> Vec<Particle> {
        self.inner
            .particles()
            .iter()
            .map(|p| Particle { inner: p.clone() })
            .collect()
    }

    #[pyo3(signature = (method = "direct", tol = 1e-12, max_iter = 500))]
    fn solve(&self, py: Python<'_>, method: &str, tol: f64, max_iter: usize) -> PyResult<Solution> {
        let inner = py
            .allow_threads(|| {
                let system = discrete::assemble_system(&self.inner)?;
                match method {
                    "direct" => discrete::solve_direct(&system),
                    "iterative" => discrete::solve_iterative(&system, max_iter, tol),
                    other => Err(Error::InvalidInput(format!("unknown method `{other}`"))),
                }
            })
            .map_err(to_py)?;
        Ok(Solution { inner })
    }

    /// `(u, u0, flag)` at each point; the scene's observation points when
    /// `points` is omitted.
    #[pyo3(signature = (solution, points = None, corrected = false))]
    fn field(
        &self,
        py: Python<'_>,
        solution: &Solution,
        points: Option<Vec<[f64; 3]>>,
        corrected: bool,
    ) -> PyResult<Vec<FieldRow>> {
        let pts = match points {
            Some(p) => p.into_iter().map(point).collect(),
            None => self.observation.clone(),
        };
        let field = py
            .allow_threads(|| discrete::eval_field(&self.inner, &solution.inner, &pts, corrected))
            .map_err(to_py)?;
        Ok(rows(field))
    }

    /// Field of the continuum limit for the scene's (all-Dirichlet) particles,
    /// binned onto `dims` cells over `[lo, hi]`.
    fn continuum_field(
        &self,
        py: Python<'_>,
        lo: [f64; 3],
        hi: [f64; 3],
        dims: [usize; 3],
        points: Vec<[f64; 3]>,
    ) -> PyResult<Vec<FieldRow>> {
        let pts: Vec<Point3> = points.into_iter().map(point).collect();
        let field = py
            .allow_threads(|| {
                if self.inner.particles().iter().any(|p| p.bc() != BoundaryCondition::Dirichlet) {
                    return Err(Error::Unsupported("continuum_field needs all-Dirichlet particles".into()));
                }
                let grid = GridSpec::new(point(lo), point(hi), dims)?;
                let dens = densities_from_ensemble(&self.inner, &grid)?;
                let medium = self.inner.evaluator().medium();
                solve_dirichlet_limit(medium, self.inner.incident(), &dens.capacitance)?.field_at(&pts)
            })
            .map_err(to_py)?;
        Ok(rows(field))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// `k f(θ)` for a sphere of size parameter `ka` from the partial-wave series.
#[pyfunction]
#[pyo3(signature = (ka, theta, bc = "dirichlet"))]
fn sphere_amplitude(ka: f64, theta: f64, bc: &str) -> PyResult<Complex64> {
    sphere_exact_amplitude(ka, parse_bc(bc)?, theta).map_err(to_py)
}

/// Capacitance of an ellipsoid with the given semi-axes.
#[pyfunction]
fn ellipsoid_capacitance(axes: [f64; 3]) -> PyResult<f64> {
    particle::capacitance(&ParticleShape::ellipsoid(axes).map_err(to_py)?).map_err(to_py)
}

#[pymodule]
pub fn manyscat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Particle>()?;
    m.add_class::<Scene>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(sphere_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(ellipsoid_capacitance, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
