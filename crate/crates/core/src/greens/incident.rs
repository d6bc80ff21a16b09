use std::sync::Arc;

use num_complex::Complex64;

use super::evaluator::GreensEvaluator;
use super::volume::LippmannSchwinger;
use crate::{CVec3, Error, Point3, Result, ZERO};

/// Scattering solution `U0(x, β)` of the background medium for a plane wave
/// `e^{ikβ·x}` incident along `β`: the plane wave itself when `n ≡ 1`, the
/// Lippmann–Schwinger solution `U0 = e^{ikβ·x} - ∫ g q0 U0` otherwise.
#[derive(Clone)]
pub struct IncidentField {
    direction: Point3,
    k: f64,
    amplitude: Complex64,
    volume: Option<Arc<LippmannSchwinger>>,
    nodal: Vec<Complex64>,
    fd_step: f64,
}

/// Field value with a flag for points inside `D` but outside the hull of the
/// quadrature nodes, where the representation formula is least accurate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub value: Complex64,
    pub extrapolated: bool,
}

impl IncidentField {
    pub fn plane_wave(evaluator: &GreensEvaluator, direction: Point3) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("incident direction must be a nonzero vector".into()));
        }
        let direction = direction / norm;
        let k = evaluator.k();
        let volume = evaluator.volume().cloned();
        let nodal = match &volume {
            None => Vec::new(),
            Some(ls) => {
                let rhs: Vec<Complex64> = ls
                    .grid()
                    .centers()
                    .iter()
                    .map(|p| Complex64::from_polar(1.0, k * direction.dot(p)))
                    .collect();
                ls.solve(&rhs)?
            }
        };
        Ok(Self {
            direction,
            k,
            amplitude: Complex64::new(1.0, 0.0),
            volume,
            nodal,
            fd_step: evaluator.fd_step(),
        })
    }

    pub fn with_amplitude(mut self, amplitude: Complex64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn direction(&self) -> &Point3 {
        &self.direction
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn is_plane_wave(&self) -> bool {
        self.volume.is_none()
    }

    /// Nodal values of the unit-amplitude field (empty for `n ≡ 1`).
    pub fn nodal(&self) -> &[Complex64] {
        &self.nodal
    }

    fn plane(&self, x: &Point3) -> Complex64 {
        Complex64::from_polar(1.0, self.k * self.direction.dot(x))
    }

    fn unit_value(&self, x: &Point3) -> Complex64 {
        match &self.volume {
            None => self.plane(x),
            Some(ls) => self.plane(x) + ls.scattered_at(x, &self.nodal),
        }
    }

    pub fn eval(&self, x: &Point3) -> Complex64 {
        self.amplitude * self.unit_value(x)
    }

    pub fn eval_flagged(&self, x: &Point3) -> FieldSample {
        let extrapolated = match &self.volume {
            Some(ls) => ls.grid().contains(x) && !ls.grid().within_node_hull(x),
            None => false,
        };
        FieldSample {
            value: self.eval(x),
            extrapolated,
        }
    }

    /// `∇U0(x)`: closed form for the plane wave, central differences otherwise.
    pub fn gradient(&self, x: &Point3) -> CVec3 {
        match &self.volume {
            None => {
                let u = self.eval(x);
                [0, 1, 2].map(|a| Complex64::new(0.0, self.k * self.direction[a]) * u)
            }
            Some(_) => {
                let h = self.fd_step;
                let mut g = [ZERO; 3];
                for (a, ga) in g.iter_mut().enumerate() {
                    let mut up = *x;
                    let mut down = *x;
                    up[a] += h;
                    down[a] -= h;
                    *ga = (self.eval(&up) - self.eval(&down)) / (2.0 * h);
                }
                g
            }
        }
    }
}
