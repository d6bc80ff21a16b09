//! The many-particle limit: ensemble densities, the limiting integral
//! equations for the effective field, and the Schrödinger-form residual.

mod density;
mod dirichlet;
mod neumann;
mod residual;
mod study;

pub use density::{
    densities_from_ensemble, CapacitanceDensity, EnsembleDensities, NumberDensity, PolarizabilityDensity,
    ScalarDensity, TensorDensity, VolumeDensity,
};
pub use dirichlet::{solve_dirichlet_limit, EffectivePotential};
pub use neumann::{solve_neumann_limit, NeumannLimitOptions};
pub use residual::{schrodinger_residual, ResidualReport, MIN_NODES_PER_WAVELENGTH};
pub use study::{LatticeRow, LatticeStudy};

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::discrete::{FieldFlag, FieldGrid};
use crate::greens::volume::{LippmannSchwinger, VolumePotential};
use crate::greens::{free_space_jet, GridSpec, IncidentField};
use crate::{CVec3, Point3, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitStatus {
    Converged,
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitDiagnostics {
    pub iterations: usize,
    pub status: LimitStatus,
    /// Last relative step (fixed-point solves) or zero.
    pub last_step: f64,
    pub pivot_ratio: Option<f64>,
}

enum Representation {
    /// `U = A e^{ikβ·x} - ∫ g q U`.
    Combined {
        ls: Arc<LippmannSchwinger>,
        direction: Point3,
        amplitude: Complex64,
    },
    /// `U = U0 + ∫ g mono - ∫ ∇_y g · dip` over the grid cells.
    Sources {
        potential: Arc<VolumePotential>,
        mono: Vec<Complex64>,
        dip: Vec<CVec3>,
    },
}

/// Effective field of a continuum problem: nodal values on the density grid
/// plus the representation formula for off-grid points.
pub struct ContinuumField {
    grid: GridSpec,
    nodal: Vec<Complex64>,
    repr: Representation,
    incident: IncidentField,
    pub diagnostics: LimitDiagnostics,
}

impl ContinuumField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `U` at the cell centers.
    pub fn nodal(&self) -> &[Complex64] {
        &self.nodal
    }

    pub fn eval(&self, x: &Point3) -> Result<Complex64> {
        match &self.repr {
            Representation::Combined {
                ls,
                direction,
                amplitude,
            } => Ok(amplitude * Complex64::from_polar(1.0, ls.k() * direction.dot(x)) + ls.scattered_at(x, &self.nodal)),
            Representation::Sources { potential, mono, dip } => {
                let mut u = self.incident.eval(x) + potential.potential_at(x, mono);
                let w = self.grid.cell_volume();
                for (j, d) in dip.iter().enumerate() {
                    if d.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                        continue;
                    }
                    let y = self.grid.center(j);
                    if (x - y).norm() < 1e-12 {
                        continue;
                    }
                    let jet = free_space_jet(x, &y, potential.k())?;
                    for q in 0..3 {
                        u -= jet.grad_y[q] * d[q] * w;
                    }
                }
                Ok(u)
            }
        }
    }

    /// Field samples at arbitrary points (flag `Extrapolated` marks points
    /// inside the grid box but outside the node hull).
    pub fn field_at(&self, points: &[Point3]) -> Result<FieldGrid> {
        let rows = points
            .par_iter()
            .map(|x| {
                let flag = if self.grid.contains(x) && !self.grid.within_node_hull(x) {
                    FieldFlag::Extrapolated
                } else {
                    FieldFlag::Valid
                };
                Ok((self.eval(x)?, self.incident.eval(x), flag))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldGrid {
            points: points.to_vec(),
            u: rows.iter().map(|r| r.0).collect(),
            u0: rows.iter().map(|r| r.1).collect(),
            flags: rows.iter().map(|r| r.2).collect(),
        })
    }

    /// The nodal solution as a field grid.
    pub fn nodal_field(&self) -> FieldGrid {
        let points = self.grid.centers();
        FieldGrid {
            u0: points.iter().map(|p| self.incident.eval(p)).collect(),
            u: self.nodal.clone(),
            flags: vec![FieldFlag::Valid; points.len()],
            points,
        }
    }
}
