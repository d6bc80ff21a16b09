//! Finite-`M` scattering: scenes, the charge/moment system, and fields.

mod field;
mod system;

use std::sync::Arc;

use num_complex::Complex64;

pub use field::{
    eval_field, eval_field_dirichlet, eval_field_neumann, far_field_amplitude, optical_theorem_residual,
    FieldFlag, FieldGrid, OpticalTheorem,
};
pub use system::{
    assemble_dirichlet_system, assemble_neumann_system, assemble_system, check_contraction, solve_direct,
    solve_iterative, ChargeSolution, Contraction, SolveMethod, SolveStatus, SolverDiagnostics,
    ScatteringSystem,
};

use crate::greens::{GreensEvaluator, IncidentField};
use crate::particle::{BoundaryCondition, Particle};
use crate::{Error, Point3, Result};

/// Threshold above which `ka` and `a/d` are reported as outside the
/// small-particle regime.
pub const SMALLNESS_WARNING: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDiagnostics {
    /// Largest particle half-diameter.
    pub a: f64,
    /// Smallest surface-to-surface gap `|x_m - x_j| - a_m - a_j`
    /// (infinite for fewer than two particles).
    pub d: f64,
    pub m: usize,
    pub ka: f64,
    pub a_over_d: f64,
    pub warnings: Vec<String>,
}

/// Background medium, incident wave and particles.
#[derive(Clone)]
pub struct Scene {
    evaluator: Arc<GreensEvaluator>,
    incident: IncidentField,
    particles: Vec<Particle>,
    diagnostics: SceneDiagnostics,
}

impl Scene {
    pub fn new(evaluator: Arc<GreensEvaluator>, incident: IncidentField, particles: Vec<Particle>) -> Result<Self> {
        if (evaluator.k() - incident.k()).abs() > 1e-14 * evaluator.k() {
            return Err(Error::InvalidInput("incident field and medium have different wavenumbers".into()));
        }
        let diagnostics = diagnose(&particles, evaluator.k())?;
        for w in &diagnostics.warnings {
            log::warn!("{w}");
        }
        log::info!(
            "scene: M = {}, a = {:.4e}, d = {:.4e}, ka = {:.4e}, a/d = {:.4e}",
            diagnostics.m,
            diagnostics.a,
            diagnostics.d,
            diagnostics.ka,
            diagnostics.a_over_d
        );
        Ok(Self {
            evaluator,
            incident,
            particles,
            diagnostics,
        })
    }

    /// Free space with a unit plane wave along `direction`.
    pub fn homogeneous(k: f64, direction: Point3, particles: Vec<Particle>) -> Result<Self> {
        let evaluator = Arc::new(GreensEvaluator::homogeneous(k)?);
        let incident = IncidentField::plane_wave(&evaluator, direction)?;
        Self::new(evaluator, incident, particles)
    }

    pub fn evaluator(&self) -> &Arc<GreensEvaluator> {
        &self.evaluator
    }

    pub fn incident(&self) -> &IncidentField {
        &self.incident
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn diagnostics(&self) -> &SceneDiagnostics {
        &self.diagnostics
    }

    pub fn k(&self) -> f64 {
        self.evaluator.k()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn all(&self, bc: BoundaryCondition) -> bool {
        self.particles.iter().all(|p| p.bc() == bc)
    }

    /// Same particles and medium with another incident field.
    pub fn with_incident(&self, incident: IncidentField) -> Result<Self> {
        Self::new(self.evaluator.clone(), incident, self.particles.clone())
    }

    pub fn with_incident_amplitude(&self, amplitude: Complex64) -> Self {
        Self {
            incident: self.incident.clone().with_amplitude(amplitude),
            ..self.clone()
        }
    }
}

fn diagnose(particles: &[Particle], k: f64) -> Result<SceneDiagnostics> {
    let a = particles.iter().map(|p| p.size()).fold(0.0, f64::max);
    let mut d = f64::INFINITY;
    for (j, pj) in particles.iter().enumerate() {
        for (m, pm) in particles.iter().enumerate().skip(j + 1) {
            let gap = (pj.center() - pm.center()).norm() - pj.size() - pm.size();
            if !(gap > 0.0) {
                return Err(Error::Overlap {
                    first: j,
                    second: m,
                    gap,
                });
            }
            d = d.min(gap);
        }
    }
    let ka = k * a;
    let a_over_d = if d.is_finite() { a / d } else { 0.0 };
    let mut warnings = Vec::new();
    if ka > SMALLNESS_WARNING {
        warnings.push(format!("ka = {ka:.3} exceeds {SMALLNESS_WARNING}: particles are not small"));
    }
    if a_over_d > SMALLNESS_WARNING {
        warnings.push(format!(
            "a/d = {a_over_d:.3} exceeds {SMALLNESS_WARNING}: particles are not well separated"
        ));
    }
    Ok(SceneDiagnostics {
        a,
        d,
        m: particles.len(),
        ka,
        a_over_d,
        warnings,
    })
}
