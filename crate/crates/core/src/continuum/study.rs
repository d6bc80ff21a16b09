use std::sync::Arc;

use super::{solve_dirichlet_limit, ScalarDensity};
use crate::discrete::{
    assemble_dirichlet_system, eval_field_dirichlet, solve_direct, solve_iterative, Scene, SolveStatus,
};
use crate::greens::{GreensEvaluator, GridSpec, IncidentField};
use crate::linalg::norm2;
use crate::particle::{BoundaryCondition, Particle};
use crate::{Error, Point3, Result};

/// Discrete lattices of Dirichlet spheres against the continuum limit with a
/// fixed total capacitance.
#[derive(Clone)]
pub struct LatticeStudy {
    pub evaluator: Arc<GreensEvaluator>,
    pub incident: IncidentField,
    /// Box filled by the lattices; its dims set the continuum grid.
    pub domain: GridSpec,
    pub total_capacitance: f64,
    pub observation: Vec<Point3>,
    /// Systems up to this size are solved directly, larger ones iteratively.
    pub direct_limit: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeRow {
    pub per_axis: usize,
    pub particles: usize,
    pub contraction_margin: f64,
    pub iterations: usize,
    /// `‖U_M - U‖ / ‖U‖` at the observation points.
    pub rel_l2_total: f64,
    /// `‖U_M - U‖ / ‖U - U0‖`.
    pub rel_l2_scattered: f64,
    /// `Σ V_j / |D|`.
    pub volume_fraction: f64,
}

impl LatticeStudy {
    /// `m³` spheres at the cell centers of an `m`-grid over the domain, each
    /// with capacitance `C_total / m³`.
    pub fn lattice(&self, m: usize) -> Result<Vec<Particle>> {
        let grid = GridSpec::new(self.domain.min, self.domain.max, [m; 3])?;
        let c = self.total_capacitance / grid.len() as f64;
        grid.centers()
            .into_iter()
            .map(|p| Particle::sphere_with_capacitance(p, c, BoundaryCondition::Dirichlet))
            .collect()
    }

    pub fn run(&self, sizes: &[usize]) -> Result<Vec<LatticeRow>> {
        if !(self.total_capacitance > 0.0) {
            return Err(Error::InvalidInput("total capacitance must be positive".into()));
        }
        let density = ScalarDensity::new(
            self.domain.clone(),
            vec![self.total_capacitance / self.domain.volume(); self.domain.len()],
        )?;
        let limit = solve_dirichlet_limit(self.evaluator.medium(), &self.incident, &density)?;
        let reference = limit.field_at(&self.observation)?;
        let scattered_ref: Vec<_> = reference.scattered();
        sizes
            .iter()
            .map(|&m| {
                let particles = self.lattice(m)?;
                let volume: f64 = particles.iter().map(|p| p.volume()).sum();
                let scene = Scene::new(self.evaluator.clone(), self.incident.clone(), particles)?;
                let system = assemble_dirichlet_system(&scene)?;
                let solution = if system.len() <= self.direct_limit {
                    solve_direct(&system)?
                } else {
                    let s = solve_iterative(&system, 10_000, self.tol)?;
                    if s.diagnostics.status != SolveStatus::Converged {
                        return Err(Error::SolverFailure(format!(
                            "fixed-point iteration did not converge for M = {} (margin {:.3})",
                            system.len(),
                            s.diagnostics.contraction_margin
                        )));
                    }
                    s
                };
                let field = eval_field_dirichlet(&scene, &solution, &self.observation, false)?;
                let diff: Vec<_> = field.u.iter().zip(&reference.u).map(|(a, b)| a - b).collect();
                Ok(LatticeRow {
                    per_axis: m,
                    particles: scene.len(),
                    contraction_margin: solution.diagnostics.contraction_margin,
                    iterations: solution.diagnostics.iterations,
                    rel_l2_total: norm2(&diff) / norm2(&reference.u),
                    rel_l2_scattered: norm2(&diff) / norm2(&scattered_ref),
                    volume_fraction: volume / self.domain.volume(),
                })
            })
            .collect()
    }
}
