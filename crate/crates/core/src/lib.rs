//! Time-harmonic scattering by many small particles embedded in a background
//! medium.
//!
//! Small particles (`ka << 1`) are reduced to point scatterers whose strengths
//! solve a linear algebraic system built from the background Green function:
//! sound-soft particles carry a charge `Q = -C u_e` set by their electrostatic
//! capacitance, sound-hard particles carry a monopole `V Δu_e` plus a dipole
//! set by their magnetic polarizability tensor. As the particle count grows the
//! discrete system is replaced by volume integral equations for the effective
//! field.
//!
//! Module map:
//!
//! * [`greens`]: free, static and anisotropic kernels, the variable-index Green
//!   function (Lippmann–Schwinger / Nyström) and incident fields.
//! * [`particle`]: shapes, triangle meshes, capacitance, volume and
//!   polarizability (closed forms and panel BEM).
//! * [`discrete`]: scenes, the charge/moment systems, direct and fixed-point
//!   solvers, field and far-field evaluation.
//! * [`continuum`]: ensemble densities and the limiting integral equations.
//! * [`oracle`]: partial-wave series, Born terms and decay integrals used as
//!   independent references.
//! * [`scene_io`]: JSON scenes, CSV results and the command line.
//!
//! Units: `g0(x, y) = 1 / (4π|x - y|)`, so capacitance has the dimension of a
//! length and a sphere of radius `a` has `C = 4πa`.

pub mod continuum;
pub mod discrete;
pub mod error;
pub mod greens;
pub mod linalg;
pub mod oracle;
pub mod particle;
pub mod scene_io;

pub use error::{Error, Result};

/// Points and real vectors in ℝ³.
pub type Point3 = nalgebra::Vector3<f64>;

pub use num_complex::Complex64;

/// A complex 3-vector (gradients of complex fields).
pub type CVec3 = [Complex64; 3];

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
