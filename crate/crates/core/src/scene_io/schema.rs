//! Serde model of the scene file. Every object rejects unknown keys.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub medium: MediumSpec,
    #[serde(default)]
    pub incident: IncidentSpec,
    #[serde(default)]
    pub particles: Vec<ParticleSpec>,
    #[serde(default)]
    pub observation: Option<ObservationSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub continuum: Option<ContinuumSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridValues {
    pub dims: [usize; 3],
    /// Samples at cell centers, `z` fastest.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    pub k: f64,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub domain: Option<BoxSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_const: Option<f64>,
    /// Cells per axis for `n_const` (default 8).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<GridValues>,
    /// Refinement of the medium grid used by the Green-function quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSpec {
    pub direction: [f64; 3],
    /// `[re, im]`, default `[1, 0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<[f64; 2]>,
}

impl Default for IncidentSpec {
    fn default() -> Self {
        Self {
            direction: [0.0, 0.0, 1.0],
            amplitude: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeSpec {
    Sphere { a: f64 },
    Ellipsoid { axes: [f64; 3] },
    /// Mesh file path, relative to the scene file; optional uniform scale.
    Mesh {
        path: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcSpec {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    pub center: [f64; 3],
    pub shape: ShapeSpec,
    pub bc: BcSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
    /// Nodes per axis, endpoints included.
    pub dims: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub center: [f64; 3],
    pub radius: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ObservationSpec {
    Points(Vec<[f64; 3]>),
    Lattice(LatticeSpec),
    /// Quasi-uniform (Fibonacci) points on a sphere.
    Sphere(SphereSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSpec {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_method")]
    pub method: MethodSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Include the first-moment correction for Dirichlet particles.
    #[serde(default)]
    pub corrected: bool,
}

fn default_method() -> MethodSpec {
    MethodSpec::Direct
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    500
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            method: default_method(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            corrected: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumSpec {
    pub grid: LatticeGrid,
}

/// A cell grid over a box (`dims` cells per axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeGrid {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub dims: [usize; 3],
}
