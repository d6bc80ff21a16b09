use nalgebra::Matrix3;

use crate::discrete::Scene;
use crate::greens::GridSpec;
use crate::{Error, Result};

/// Piecewise-constant scalar density on the cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDensity {
    grid: GridSpec,
    values: Vec<f64>,
}

pub type CapacitanceDensity = ScalarDensity;
pub type VolumeDensity = ScalarDensity;
pub type NumberDensity = ScalarDensity;

impl ScalarDensity {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "density has {} values for {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("densities must be finite and non-negative".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&crate::Point3) -> f64) -> Result<Self> {
        let values = grid.centers().iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `∫ ρ dy`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v * factor).collect())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Piecewise-constant tensor field on the cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDensity {
    grid: GridSpec,
    values: Vec<Matrix3<f64>>,
}

pub type PolarizabilityDensity = TensorDensity;

impl TensorDensity {
    pub fn new(grid: GridSpec, values: Vec<Matrix3<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "tensor field has {} values for {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn uniform(grid: GridSpec, value: Matrix3<f64>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![value; n],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Matrix3<f64>] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDensities {
    /// `C(y)`: capacitance per unit volume.
    pub capacitance: CapacitanceDensity,
    /// `v(y)`: particle volume per unit volume.
    pub volume: VolumeDensity,
    /// `N(y)`: particles per unit volume.
    pub number: NumberDensity,
    /// Volume-weighted mean polarizability `Σ V_j β_j / Σ V_j` per cell, so
    /// that `v β` carries `Σ V_j β_j` per unit volume (zero in empty cells).
    pub polarizability: PolarizabilityDensity,
}

/// Bins particle properties into the cells of `grid`.
pub fn densities_from_ensemble(scene: &Scene, grid: &GridSpec) -> Result<EnsembleDensities> {
    let n = grid.len();
    let w = grid.cell_volume();
    let mut c = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut num = vec![0.0; n];
    let mut vb = vec![Matrix3::zeros(); n];
    for (j, p) in scene.particles().iter().enumerate() {
        if !grid.contains(p.center()) {
            return Err(Error::InvalidInput(format!(
                "particle {j} at {:?} lies outside the density grid",
                p.center().as_slice()
            )));
        }
        let cell = grid.index(grid.cell_of(p.center()).expect("contained point has a cell"));
        c[cell] += p.capacitance() / w;
        v[cell] += p.volume() / w;
        num[cell] += 1.0 / w;
        vb[cell] += p.polarizability() * (p.volume() / w);
    }
    let beta = vb
        .iter()
        .zip(&v)
        .map(|(m, vol)| if *vol > 0.0 { m / *vol } else { Matrix3::zeros() })
        .collect();
    Ok(EnsembleDensities {
        capacitance: ScalarDensity::new(grid.clone(), c)?,
        volume: ScalarDensity::new(grid.clone(), v)?,
        number: ScalarDensity::new(grid.clone(), num)?,
        polarizability: TensorDensity::new(grid.clone(), beta)?,
    })
}
