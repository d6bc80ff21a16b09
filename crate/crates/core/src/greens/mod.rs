//! Green functions and incident fields of the background medium.

mod evaluator;
mod grid;
mod incident;
mod kernels;
mod medium;
pub mod volume;

pub use evaluator::{FarFieldRatio, GreenColumn, GreensEvaluator, PointSource};
pub use grid::GridSpec;
pub use incident::{FieldSample, IncidentField};
pub use kernels::{
    anisotropic_static_green, free_space_green, free_space_jet, static_green, AnisotropicTensor,
    GreenJet, COINCIDENCE_TOL,
};
pub use medium::{BackgroundMedium, RefractionProfile};
