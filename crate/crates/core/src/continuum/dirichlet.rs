use std::sync::Arc;

use num_complex::Complex64;

use super::{ContinuumField, LimitDiagnostics, LimitStatus, Representation, ScalarDensity};
use crate::greens::volume::{LippmannSchwinger, VolumePotential};
use crate::greens::{BackgroundMedium, GridSpec, IncidentField};
use crate::{Error, Result};

/// `q(x) = C(x) + k²(1 - n(x))` on the density grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotential {
    grid: GridSpec,
    values: Vec<f64>,
}

impl EffectivePotential {
    pub fn new(medium: &BackgroundMedium, density: &ScalarDensity) -> Self {
        let grid = density.grid().clone();
        let values = grid
            .centers()
            .iter()
            .zip(density.values())
            .map(|(p, c)| c + medium.potential_at(p))
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput("potential length differs from the grid".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Solves `U = U0 - ∫_D G(x, y) C(y) U(y) dy`.
///
/// Because `U0` and `G` belong to `∇² + k² n`, the equation is equivalent to
/// `U = e^{ikβ·x} - ∫ g q U` with the effective potential `q = C + k²(1 - n)`,
/// which is what is discretized. The density grid must therefore cover the
/// inhomogeneity of the medium.
pub fn solve_dirichlet_limit(
    medium: &BackgroundMedium,
    incident: &IncidentField,
    density: &ScalarDensity,
) -> Result<ContinuumField> {
    let grid = density.grid().clone();
    if let Some(domain) = medium.domain() {
        if !medium.is_homogeneous() {
            let inside = |p: &crate::Point3| (0..3).all(|a| p[a] >= grid.min[a] - 1e-12 && p[a] <= grid.max[a] + 1e-12);
            if !inside(&domain.min) || !inside(&domain.max) {
                return Err(Error::Unsupported(
                    "the density grid must contain the inhomogeneity of the medium".into(),
                ));
            }
        }
    }
    if (incident.k() - medium.k()).abs() > 1e-14 * medium.k() {
        return Err(Error::InvalidInput("incident field and medium have different wavenumbers".into()));
    }
    let potential = EffectivePotential::new(medium, density);
    let ls = LippmannSchwinger::new(VolumePotential::new(grid.clone(), medium.k()), potential.values)?;
    let direction = *incident.direction();
    let amplitude = incident.amplitude();
    let rhs: Vec<Complex64> = grid
        .centers()
        .iter()
        .map(|p| amplitude * Complex64::from_polar(1.0, medium.k() * direction.dot(p)))
        .collect();
    let nodal = ls.solve(&rhs)?;
    let pivot_ratio = ls.pivot_ratio();
    Ok(ContinuumField {
        grid,
        nodal,
        repr: Representation::Combined {
            ls: Arc::new(ls),
            direction,
            amplitude,
        },
        incident: incident.clone(),
        diagnostics: LimitDiagnostics {
            iterations: 1,
            status: LimitStatus::Converged,
            last_step: 0.0,
            pivot_ratio,
        },
    })
}
