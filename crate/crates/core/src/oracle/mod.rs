//! Independent reference computations: exact sphere series, Born terms and
//! direct quadrature of decay integrals.

pub mod bessel;
mod born;
pub mod quadrature;
mod sphere;

pub use born::born_first_term;
pub use quadrature::{gauss_legendre, j_integral};
pub use sphere::{sphere_exact_amplitude, PartialWaveSeries, TAIL_TOLERANCE};
