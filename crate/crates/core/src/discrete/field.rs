use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::system::{radiation, ChargeSolution};
use super::Scene;
use crate::greens::{free_space_jet, GreenColumn, GreenJet, IncidentField};
use crate::oracle::gauss_legendre;
use crate::particle::BoundaryCondition;
use crate::{CVec3, Error, Point3, Result, ZERO};

/// Observation points closer than this many particle sizes to a center are
/// flagged as outside the point-scatterer validity zone.
pub const NEAR_FIELD_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFlag {
    Valid = 0,
    /// Within `3a` of a particle center.
    NearField = 1,
    /// Inside a particle (contributions of that particle omitted).
    Inside = 2,
    /// Inside the inhomogeneity but outside the quadrature-node hull.
    Extrapolated = 3,
}

impl FieldFlag {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Self::Valid),
            1 => Ok(Self::NearField),
            2 => Ok(Self::Inside),
            3 => Ok(Self::Extrapolated),
            c => Err(Error::InvalidInput(format!("unknown field flag {c}"))),
        }
    }
}

/// Sampled total field `U`, incident field `U0` and validity flags.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub points: Vec<Point3>,
    pub u: Vec<Complex64>,
    pub u0: Vec<Complex64>,
    pub flags: Vec<FieldFlag>,
}

impl FieldGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scattered(&self) -> Vec<Complex64> {
        self.u.iter().zip(&self.u0).map(|(u, u0)| u - u0).collect()
    }
}

/// `G(x, x_m)` and `∇_y G(x, x_m)` for one observation point.
enum Probe {
    Free(Point3, f64),
    Numeric(GreenColumn, f64),
}

impl Probe {
    fn new(scene: &Scene, x: &Point3) -> Result<Self> {
        let ev = scene.evaluator();
        Ok(if ev.is_homogeneous() {
            Self::Free(*x, ev.k())
        } else {
            // reciprocity: G(x, y) = G(y, x) is the column with source x
            Self::Numeric(ev.column(x)?, ev.fd_step())
        })
    }

    fn jet(&self, y: &Point3, derivatives: bool) -> Result<GreenJet> {
        match self {
            Self::Free(x, k) => free_space_jet(x, y, *k),
            Self::Numeric(col, h) => {
                let mut grad_y = [ZERO; 3];
                if derivatives {
                    for (b, gb) in grad_y.iter_mut().enumerate() {
                        let mut up = *y;
                        let mut down = *y;
                        up[b] += h;
                        down[b] -= h;
                        *gb = (col.value(&up)? - col.value(&down)?) / (2.0 * h);
                    }
                }
                Ok(GreenJet {
                    value: col.value(y)?,
                    grad_x: [ZERO; 3],
                    grad_y,
                    mixed: [[ZERO; 3]; 3],
                })
            }
        }
    }
}

/// `U(x) = U0(x) + Σ_m` (field radiated by particle `m`).
///
/// With `corrected`, Dirichlet particles also radiate the first-moment term
/// `u_e(x_m) ∇_y G(x, x_m) · ∫ (s - x_m) σ_m ds`.
pub fn eval_field(scene: &Scene, solution: &ChargeSolution, points: &[Point3], corrected: bool) -> Result<FieldGrid> {
    if solution.len() != scene.len() {
        return Err(Error::InvalidInput(format!(
            "solution has {} particles, scene has {}",
            solution.len(),
            scene.len()
        )));
    }
    let k = scene.k();
    let a = scene.diagnostics().a;
    let medium = scene.evaluator().medium();
    let particles = scene.particles();
    let n_at: Vec<f64> = particles.iter().map(|p| medium.refraction_at(p.center())).collect();
    let need_derivs = particles.iter().any(|p| p.bc() == BoundaryCondition::Neumann)
        || (corrected && particles.iter().any(|p| p.properties().dirichlet_moment.norm() > 0.0));

    let rows = points
        .par_iter()
        .map(|x| {
            let sample = scene.incident().eval_flagged(x);
            let mut flag = if sample.extrapolated {
                FieldFlag::Extrapolated
            } else {
                FieldFlag::Valid
            };
            let probe = Probe::new(scene, x)?;
            let mut u = sample.value;
            for (m, pm) in particles.iter().enumerate() {
                if pm.contains(x) {
                    flag = FieldFlag::Inside;
                    continue;
                }
                if flag == FieldFlag::Valid && (x - pm.center()).norm() < NEAR_FIELD_FACTOR * a {
                    flag = FieldFlag::NearField;
                }
                let jet = probe.jet(pm.center(), need_derivs)?;
                let rad = radiation(&jet, pm, n_at[m], k);
                let block = solution.block(m);
                for (c, val) in block.iter().enumerate() {
                    u += rad[0][c] * val;
                }
                if corrected && pm.bc() == BoundaryCondition::Dirichlet {
                    let p = pm.properties().dirichlet_moment;
                    let u_e = -block[0] / pm.capacitance();
                    for q in 0..3 {
                        u += u_e * jet.grad_y[q] * p[q];
                    }
                }
            }
            Ok((u, sample.value, flag))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grid = FieldGrid {
        points: points.to_vec(),
        u: Vec::with_capacity(rows.len()),
        u0: Vec::with_capacity(rows.len()),
        flags: Vec::with_capacity(rows.len()),
    };
    for (u, u0, f) in rows {
        grid.u.push(u);
        grid.u0.push(u0);
        grid.flags.push(f);
    }
    Ok(grid)
}

pub fn eval_field_dirichlet(
    scene: &Scene,
    solution: &ChargeSolution,
    points: &[Point3],
    corrected: bool,
) -> Result<FieldGrid> {
    if !scene.all(BoundaryCondition::Dirichlet) {
        return Err(Error::BoundaryCondition("expected Dirichlet particles only".into()));
    }
    eval_field(scene, solution, points, corrected)
}

pub fn eval_field_neumann(scene: &Scene, solution: &ChargeSolution, points: &[Point3]) -> Result<FieldGrid> {
    if !scene.all(BoundaryCondition::Neumann) {
        return Err(Error::BoundaryCondition("expected Neumann particles only".into()));
    }
    eval_field(scene, solution, points, false)
}

/// Far-field amplitude `f(x̂)`, the coefficient of `e^{ikr}/r` in the
/// scattered field.
///
/// `G(x, y) ~ e^{ik|x|}/(4π|x|) · w(y)` with `w(y) = e^{-ik x̂·y}` in free
/// space and `w = U0(·, -x̂)` for an inhomogeneous background.
pub fn far_field_amplitude(
    scene: &Scene,
    solution: &ChargeSolution,
    directions: &[Point3],
    corrected: bool,
) -> Result<Vec<Complex64>> {
    let k = scene.k();
    let medium = scene.evaluator().medium();
    let particles = scene.particles();
    directions
        .iter()
        .map(|dir| {
            let norm = dir.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::InvalidInput("far-field direction must be a nonzero vector".into()));
            }
            let xhat = dir / norm;
            let reverse = if scene.evaluator().is_homogeneous() {
                None
            } else {
                Some(IncidentField::plane_wave(scene.evaluator(), -xhat)?)
            };
            let wave = |y: &Point3| -> (Complex64, CVec3) {
                match &reverse {
                    None => {
                        let w = Complex64::from_polar(1.0, -k * xhat.dot(y));
                        (w, [0, 1, 2].map(|a| Complex64::new(0.0, -k * xhat[a]) * w))
                    }
                    Some(inc) => (inc.eval(y), inc.gradient(y)),
                }
            };
            let mut f = ZERO;
            for (m, pm) in particles.iter().enumerate() {
                let (w, grad) = wave(pm.center());
                let block = solution.block(m);
                match pm.bc() {
                    BoundaryCondition::Dirichlet => {
                        f += w * block[0];
                        if corrected {
                            let p = pm.properties().dirichlet_moment;
                            let u_e = -block[0] / pm.capacitance();
                            for q in 0..3 {
                                f += u_e * grad[q] * p[q];
                            }
                        }
                    }
                    BoundaryCondition::Neumann => {
                        let v = pm.volume();
                        let beta = pm.polarizability();
                        let n_m = medium.refraction_at(pm.center());
                        f += -k * k * n_m * v * w * block[0];
                        for p in 0..3 {
                            for q in 0..3 {
                                f -= v * grad[q] * beta[(q, p)] * block[p + 1];
                            }
                        }
                    }
                }
            }
            Ok(f / (4.0 * PI))
        })
        .collect()
}

/// Optical-theorem balance for a free-space scene, per unit incident
/// amplitude: `Im f(β̂)` against `(k/4π) ∫ |f|² dΩ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalTheorem {
    pub forward_imag: f64,
    pub scattered_power: f64,
    pub residual: f64,
}

pub fn optical_theorem_residual(scene: &Scene, solution: &ChargeSolution, n_theta: usize) -> Result<OpticalTheorem> {
    if !scene.evaluator().is_homogeneous() {
        return Err(Error::Unsupported("optical theorem diagnostic needs a homogeneous medium".into()));
    }
    let amp = scene.incident().amplitude();
    if amp.norm() == 0.0 {
        return Err(Error::InvalidInput("incident amplitude is zero".into()));
    }
    let (mu, w) = gauss_legendre(n_theta.max(2));
    let n_phi = 2 * n_theta.max(2);
    let mut dirs = Vec::with_capacity(mu.len() * n_phi);
    let mut weights = Vec::with_capacity(mu.len() * n_phi);
    for (m, wm) in mu.iter().zip(&w) {
        let s = (1.0 - m * m).sqrt();
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            dirs.push(Point3::new(s * phi.cos(), s * phi.sin(), *m));
            weights.push(wm * 2.0 * PI / n_phi as f64);
        }
    }
    let f = far_field_amplitude(scene, solution, &dirs, false)?;
    let power: f64 = f.iter().zip(&weights).map(|(fi, wi)| (fi / amp).norm_sqr() * wi).sum::<f64>();
    let forward = far_field_amplitude(scene, solution, &[*scene.incident().direction()], false)?[0] / amp;
    let scattered_power = scene.k() / (4.0 * PI) * power;
    Ok(OpticalTheorem {
        forward_imag: forward.im,
        scattered_power,
        residual: forward.im - scattered_power,
    })
}
