use super::grid::GridSpec;
use crate::{Error, Point3, Result};

/// Refraction index `n(x)` sampled at the cell centers of a box `D`;
/// `n ≡ 1` outside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct RefractionProfile {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl RefractionProfile {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "refraction grid expects {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|n| !n.is_finite()) {
            return Err(Error::InvalidInput("refraction samples must be finite".into()));
        }
        Ok(Self { grid, samples })
    }

    pub fn constant(grid: GridSpec, n: f64) -> Result<Self> {
        let len = grid.len();
        Self::new(grid, vec![n; len])
    }

    /// Samples `n(center)` from a closure.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&Point3) -> f64) -> Result<Self> {
        let samples = grid.centers().iter().map(f).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Background medium: wavenumber `k > 0` and an optional compactly supported
/// refraction profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundMedium {
    k: f64,
    profile: Option<RefractionProfile>,
}

impl BackgroundMedium {
    pub fn homogeneous(k: f64) -> Result<Self> {
        Self::new(k, None)
    }

    pub fn new(k: f64, profile: Option<RefractionProfile>) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidInput(format!("wavenumber must be positive, got {k}")));
        }
        Ok(Self { k, profile })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn profile(&self) -> Option<&RefractionProfile> {
        self.profile.as_ref()
    }

    /// True when `n ≡ 1` everywhere (no profile, or every sample equals 1).
    pub fn is_homogeneous(&self) -> bool {
        self.profile
            .as_ref()
            .map_or(true, |p| p.samples.iter().all(|&n| n == 1.0))
    }

    /// The box `D` carrying the inhomogeneity.
    pub fn domain(&self) -> Option<&GridSpec> {
        self.profile.as_ref().map(|p| &p.grid)
    }

    /// `n(x)`: trilinear between samples inside `D`, 1 outside.
    pub fn refraction_at(&self, x: &Point3) -> f64 {
        match &self.profile {
            Some(p) if p.grid.contains(x) => p.grid.interpolate(&p.samples, x),
            _ => 1.0,
        }
    }

    /// `q0(x) = k² (1 - n(x))`.
    pub fn potential_at(&self, x: &Point3) -> f64 {
        self.k * self.k * (1.0 - self.refraction_at(x))
    }

    /// Number of grid nodes per wavelength for a given spacing.
    pub fn nodes_per_wavelength(&self, h: f64) -> f64 {
        2.0 * std::f64::consts::PI / (self.k * h)
    }
}
