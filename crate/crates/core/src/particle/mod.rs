//! Small particles: shapes, capacitance, volume and polarizability.

pub mod bem;
pub mod closed;
mod mesh;

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64;

pub use mesh::TriMesh;

use crate::{Error, Point3, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Sound-soft: `U = 0` on the surface.
    Dirichlet,
    /// Sound-hard: `∂U/∂N = 0` on the surface.
    Neumann,
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "soft" => Ok(Self::Dirichlet),
            "neumann" | "hard" => Ok(Self::Neumann),
            other => Err(Error::InvalidInput(format!(
                "unknown boundary condition {other:?} (expected dirichlet or neumann)"
            ))),
        }
    }
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        })
    }
}

/// Particle geometry in local coordinates, centered at the origin.
#[derive(Debug, Clone)]
pub enum ParticleShape {
    Sphere { radius: f64 },
    Ellipsoid { axes: [f64; 3] },
    Mesh(Arc<TriMesh>),
}

impl ParticleShape {
    pub fn sphere(radius: f64) -> Result<Self> {
        let s = Self::Sphere { radius };
        s.validate()?;
        Ok(s)
    }

    pub fn ellipsoid(axes: [f64; 3]) -> Result<Self> {
        let s = Self::Ellipsoid { axes };
        s.validate()?;
        Ok(s)
    }

    /// Wraps a mesh, translating it so its volume centroid is the origin.
    pub fn mesh(mesh: TriMesh) -> Self {
        let c = mesh.volume_centroid();
        Self::Mesh(Arc::new(mesh.translated(&-c)))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Sphere { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                Err(Error::InvalidInput(format!("sphere radius must be positive, got {radius}")))
            }
            Self::Ellipsoid { axes } if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) => {
                Err(Error::InvalidInput(format!("ellipsoid semi-axes must be positive, got {axes:?}")))
            }
            _ => Ok(()),
        }
    }

    /// Half of the diameter.
    pub fn half_diameter(&self) -> f64 {
        match self {
            Self::Sphere { radius } => *radius,
            Self::Ellipsoid { axes } => axes.iter().cloned().fold(0.0, f64::max),
            Self::Mesh(m) => m.half_diameter(),
        }
    }

    /// True when `p` (local coordinates) lies inside the particle.
    pub fn contains(&self, p: &Point3) -> bool {
        match self {
            Self::Sphere { radius } => p.norm() < *radius,
            Self::Ellipsoid { axes } => (0..3).map(|i| (p[i] / axes[i]).powi(2)).sum::<f64>() < 1.0,
            Self::Mesh(m) => {
                // solid angle sum: 4π inside, 0 outside
                let omega: f64 = m
                    .triangles()
                    .iter()
                    .map(|t| {
                        let [a, b, c] = t.map(|i| m.vertices()[i] - p);
                        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
                        let num = a.dot(&b.cross(&c));
                        let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
                        2.0 * num.atan2(den)
                    })
                    .sum();
                omega > 2.0 * PI
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Bem,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizabilityTensor {
    pub matrix: Matrix3<f64>,
    pub provenance: Provenance,
}

pub fn capacitance(shape: &ParticleShape) -> Result<f64> {
    shape.validate()?;
    match shape {
        ParticleShape::Sphere { radius } => Ok(closed::sphere_capacitance(*radius)),
        ParticleShape::Ellipsoid { axes } => Ok(closed::ellipsoid_capacitance(*axes)),
        ParticleShape::Mesh(m) => bem::capacitance_bem(m),
    }
}

pub fn volume(shape: &ParticleShape) -> Result<f64> {
    shape.validate()?;
    Ok(match shape {
        ParticleShape::Sphere { radius } => closed::sphere_volume(*radius),
        ParticleShape::Ellipsoid { axes } => closed::ellipsoid_volume(*axes),
        ParticleShape::Mesh(m) => m.signed_volume(),
    })
}

pub fn polarizability(shape: &ParticleShape) -> Result<PolarizabilityTensor> {
    shape.validate()?;
    Ok(match shape {
        ParticleShape::Sphere { .. } => PolarizabilityTensor {
            matrix: Matrix3::identity() * closed::SPHERE_BETA,
            provenance: Provenance::ClosedForm,
        },
        ParticleShape::Ellipsoid { axes } => PolarizabilityTensor {
            matrix: closed::ellipsoid_polarizability(*axes),
            provenance: Provenance::ClosedForm,
        },
        ParticleShape::Mesh(m) => PolarizabilityTensor {
            matrix: bem::polarizability_bem(m, &m.volume_centroid())?,
            provenance: Provenance::Bem,
        },
    })
}

/// Solution of `∫_S g0(s, t) σ(t) dt = -u_e` on the particle surface.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceDensity {
    /// Constant density on a sphere of the given radius.
    Uniform { value: Complex64, radius: f64 },
    /// Equilibrium density on an ellipsoid,
    /// `σ(s) = -C u_e / (4π a1 a2 a3 sqrt(Σ s_i² / a_i⁴))`.
    Ellipsoid { total: Complex64, axes: [f64; 3] },
    /// One value per mesh panel.
    Panels { values: Vec<Complex64>, areas: Vec<f64> },
}

impl SurfaceDensity {
    pub fn total_charge(&self) -> Complex64 {
        match self {
            Self::Uniform { value, radius } => value * (4.0 * PI * radius * radius),
            Self::Ellipsoid { total, .. } => *total,
            Self::Panels { values, areas } => values.iter().zip(areas).map(|(v, a)| v * a).sum(),
        }
    }

    /// Density at a surface point (local coordinates; ignored for panels).
    pub fn value_at(&self, s: &Point3, panel: usize) -> Complex64 {
        match self {
            Self::Uniform { value, .. } => *value,
            Self::Ellipsoid { total, axes } => {
                let w: f64 = (0..3).map(|i| s[i] * s[i] / axes[i].powi(4)).sum::<f64>().sqrt();
                total / (4.0 * PI * axes[0] * axes[1] * axes[2] * w)
            }
            Self::Panels { values, .. } => values[panel],
        }
    }
}

pub fn solve_dirichlet_density(shape: &ParticleShape, u_e: Complex64) -> Result<SurfaceDensity> {
    shape.validate()?;
    Ok(match shape {
        ParticleShape::Sphere { radius } => SurfaceDensity::Uniform {
            value: -u_e / (4.0 * PI * radius * radius) * closed::sphere_capacitance(*radius),
            radius: *radius,
        },
        ParticleShape::Ellipsoid { axes } => SurfaceDensity::Ellipsoid {
            total: -u_e * closed::ellipsoid_capacitance(*axes),
            axes: *axes,
        },
        ParticleShape::Mesh(m) => SurfaceDensity::Panels {
            values: bem::dirichlet_density_bem(m, u_e)?,
            areas: m.areas().to_vec(),
        },
    })
}

/// Cached scattering parameters of a shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeProperties {
    pub capacitance: f64,
    pub volume: f64,
    pub polarizability: PolarizabilityTensor,
    /// `∫ (s - x_m) σ ds` for `u_e = 1`; zero for centrally symmetric shapes.
    pub dirichlet_moment: Point3,
    pub half_diameter: f64,
}

impl ShapeProperties {
    pub fn compute(shape: &ParticleShape) -> Result<Self> {
        shape.validate()?;
        let (capacitance, dirichlet_moment) = match shape {
            ParticleShape::Mesh(m) => {
                let s = bem::solve_capacitance(m, &m.volume_centroid())?;
                (s.capacitance, s.unit_moment)
            }
            _ => (self::capacitance(shape)?, Point3::zeros()),
        };
        Ok(Self {
            capacitance,
            volume: volume(shape)?,
            polarizability: polarizability(shape)?,
            dirichlet_moment,
            half_diameter: shape.half_diameter(),
        })
    }
}

/// A particle placed at `center` (its center of mass).
#[derive(Debug, Clone)]
pub struct Particle {
    center: Point3,
    shape: ParticleShape,
    bc: BoundaryCondition,
    props: ShapeProperties,
}

impl Particle {
    pub fn new(center: Point3, shape: ParticleShape, bc: BoundaryCondition) -> Result<Self> {
        let shape = match shape {
            ParticleShape::Mesh(m) if m.volume_centroid().norm() > 1e-9 * m.half_diameter() => {
                ParticleShape::mesh((*m).clone())
            }
            s => s,
        };
        let props = ShapeProperties::compute(&shape)?;
        Self::with_properties(center, shape, bc, props)
    }

    /// Reuses properties computed once for a shared shape.
    pub fn with_properties(
        center: Point3,
        shape: ParticleShape,
        bc: BoundaryCondition,
        props: ShapeProperties,
    ) -> Result<Self> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("particle center must be finite".into()));
        }
        Ok(Self {
            center,
            shape,
            bc,
            props,
        })
    }

    pub fn sphere(center: Point3, radius: f64, bc: BoundaryCondition) -> Result<Self> {
        Self::new(center, ParticleShape::sphere(radius)?, bc)
    }

    /// Sphere whose radius gives the requested capacitance `C = 4πa`.
    pub fn sphere_with_capacitance(center: Point3, c: f64, bc: BoundaryCondition) -> Result<Self> {
        Self::sphere(center, c / (4.0 * PI), bc)
    }

    pub fn center(&self) -> &Point3 {
        &self.center
    }

    pub fn shape(&self) -> &ParticleShape {
        &self.shape
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn properties(&self) -> &ShapeProperties {
        &self.props
    }

    pub fn capacitance(&self) -> f64 {
        self.props.capacitance
    }

    pub fn volume(&self) -> f64 {
        self.props.volume
    }

    pub fn polarizability(&self) -> &Matrix3<f64> {
        &self.props.polarizability.matrix
    }

    /// `a_m`: half of the particle diameter.
    pub fn size(&self) -> f64 {
        self.props.half_diameter
    }

    pub fn contains(&self, x: &Point3) -> bool {
        self.shape.contains(&(x - self.center))
    }

    pub fn translated(&self, shift: &Point3) -> Self {
        Self {
            center: self.center + shift,
            ..self.clone()
        }
    }
}
