use num_complex::Complex64;

use super::bessel::{derivatives, spherical_j, spherical_y};
use crate::particle::BoundaryCondition;
use crate::{Error, Result};

/// Relative size of the last retained coefficient required to accept a
/// truncation.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Exact partial-wave solution for plane-wave scattering by a sphere of
/// radius `a` in free space, in units where `k = 1` (so `ka` is the radius).
///
/// `f(θ) = (1/ik) Σ_l (2l + 1) c_l P_l(cos θ)`, with `c_l = -j_l / h_l` for a
/// sound-soft sphere and `c_l = -j_l' / h_l'` for a sound-hard one.
#[derive(Debug, Clone)]
pub struct PartialWaveSeries {
    ka: f64,
    bc: BoundaryCondition,
    coefficients: Vec<Complex64>,
}

impl PartialWaveSeries {
    pub fn new(ka: f64, bc: BoundaryCondition, l_max: usize) -> Result<Self> {
        if !(ka > 0.0) || !ka.is_finite() {
            return Err(Error::InvalidInput(format!("ka must be positive, got {ka}")));
        }
        let j = spherical_j(l_max + 1, ka);
        let y = spherical_y(l_max + 1, ka);
        let coefficients: Vec<Complex64> = match bc {
            BoundaryCondition::Dirichlet => (0..=l_max)
                .map(|l| -Complex64::new(j[l], 0.0) / Complex64::new(j[l], y[l]))
                .collect(),
            BoundaryCondition::Neumann => {
                let dj = derivatives(&j, ka);
                let dy = derivatives(&y, ka);
                (0..=l_max)
                    .map(|l| -Complex64::new(dj[l], 0.0) / Complex64::new(dj[l], dy[l]))
                    .collect()
            }
        };
        let lead = coefficients.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let tail = coefficients[l_max].norm();
        if !(tail <= TAIL_TOLERANCE * lead) {
            return Err(Error::InvalidInput(format!(
                "l_max = {l_max} is insufficient at ka = {ka}: tail |c_l_max| / max|c_l| = {:.3e}",
                tail / lead
            )));
        }
        Ok(Self {
            ka,
            bc,
            coefficients,
        })
    }

    /// Truncation chosen from `ka` (at least 4 terms) and verified.
    pub fn auto(ka: f64, bc: BoundaryCondition) -> Result<Self> {
        let l_max = (ka + 4.0 * ka.cbrt() + 12.0).ceil() as usize;
        Self::new(ka, bc, l_max.max(4))
    }

    pub fn ka(&self) -> f64 {
        self.ka
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn l_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `k f(θ)`: the amplitude for unit wavenumber.
    pub fn amplitude(&self, theta: f64) -> Complex64 {
        let mu = theta.cos();
        let (mut p_prev, mut p) = (1.0, mu);
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, c) in self.coefficients.iter().enumerate() {
            let pl = match l {
                0 => 1.0,
                1 => mu,
                _ => {
                    let next = ((2 * l - 1) as f64 * mu * p - (l - 1) as f64 * p_prev) / l as f64;
                    p_prev = p;
                    p = next;
                    next
                }
            };
            acc += c * ((2 * l + 1) as f64 * pl);
        }
        acc / Complex64::new(0.0, 1.0)
    }
}

/// `k f(θ)` for a sphere with size parameter `ka`.
pub fn sphere_exact_amplitude(ka: f64, bc: BoundaryCondition, theta: f64) -> Result<Complex64> {
    Ok(PartialWaveSeries::auto(ka, bc)?.amplitude(theta))
}
