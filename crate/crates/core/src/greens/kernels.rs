//! Closed-form kernels: outgoing Helmholtz, static Laplace and the anisotropic
//! static fundamental solution.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::{CVec3, Error, Point3, Result};

/// Separations below this are treated as coincident points.
pub const COINCIDENCE_TOL: f64 = 1e-14;

fn separation(x: &Point3, y: &Point3) -> Result<(Point3, f64)> {
    let d = x - y;
    let r = d.norm();
    if !(r > COINCIDENCE_TOL * (1.0 + x.norm().max(y.norm()))) {
        return Err(Error::CoincidentPoints);
    }
    Ok((d, r))
}

/// `g(x, y) = e^{ik|x-y|} / (4π|x-y|)`.
pub fn free_space_green(x: &Point3, y: &Point3, k: f64) -> Result<Complex64> {
    let (_, r) = separation(x, y)?;
    Ok(green_at_distance(r, k))
}

#[inline]
pub(crate) fn green_at_distance(r: f64, k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (4.0 * PI * r), k * r)
}

/// `g0(x, y) = 1 / (4π|x-y|)`.
pub fn static_green(x: &Point3, y: &Point3) -> Result<f64> {
    let (_, r) = separation(x, y)?;
    Ok(1.0 / (4.0 * PI * r))
}

/// Symmetric positive-definite coefficient matrix `a_ip` frozen at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicTensor {
    a: Matrix3<f64>,
    inverse: Matrix3<f64>,
    det: f64,
}

impl AnisotropicTensor {
    pub fn new(a: Matrix3<f64>) -> Result<Self> {
        let asym = (a - a.transpose()).abs().max();
        if asym > 1e-12 * a.abs().max().max(1.0) {
            return Err(Error::InvalidInput("anisotropic tensor is not symmetric".into()));
        }
        let eig = a.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        if !(lo > 1e-14 * hi.abs().max(f64::MIN_POSITIVE)) || !lo.is_finite() {
            return Err(Error::Singular(format!(
                "anisotropic tensor is not positive definite (eigenvalues {:.3e}..{:.3e})",
                lo, hi
            )));
        }
        let inverse = a
            .try_inverse()
            .ok_or_else(|| Error::Singular("anisotropic tensor is not invertible".into()))?;
        Ok(Self {
            a,
            inverse,
            det: a.determinant(),
        })
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity()).expect("identity is positive definite")
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.a
    }

    /// Ellipticity bounds `(c1, c2)`: smallest and largest eigenvalue.
    pub fn ellipticity_bounds(&self) -> (f64, f64) {
        let eig = self.a.symmetric_eigenvalues();
        (eig.min(), eig.max())
    }
}

/// Fundamental solution of `Σ a_ip ∂²/∂x_i∂x_p` (with the `-δ` convention):
/// `1 / (4π sqrt(det a) sqrt(a⁻¹_ip d_i d_p))`, `d = x - y`.
pub fn anisotropic_static_green(x: &Point3, y: &Point3, a: &AnisotropicTensor) -> Result<f64> {
    let (d, _) = separation(x, y)?;
    let quad = d.dot(&(a.inverse * d));
    Ok(1.0 / (4.0 * PI * a.det.sqrt() * quad.sqrt()))
}

/// Value and first/second derivatives of a Green function `G(x, y)`.
///
/// `mixed[a][b] = ∂²G / ∂x_a ∂y_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenJet {
    pub value: Complex64,
    pub grad_x: CVec3,
    pub grad_y: CVec3,
    pub mixed: [CVec3; 3],
}

/// Closed-form jet of the free-space kernel.
pub fn free_space_jet(x: &Point3, y: &Point3, k: f64) -> Result<GreenJet> {
    let (d, r) = separation(x, y)?;
    let ik = Complex64::new(0.0, k);
    let g = green_at_distance(r, k);
    let g1 = g * (ik - 1.0 / r);
    let g2 = g * ((ik - 1.0 / r) * (ik - 1.0 / r) + 1.0 / (r * r));
    let u = d / r;
    let mut grad_x = [Complex64::new(0.0, 0.0); 3];
    let mut grad_y = grad_x;
    let mut mixed = [grad_x; 3];
    for a in 0..3 {
        grad_x[a] = g1 * u[a];
        grad_y[a] = -grad_x[a];
        for b in 0..3 {
            let delta = if a == b { 1.0 } else { 0.0 };
            // ∂x_a ∂y_b g = -∂x_a ∂x_b g
            mixed[a][b] = -(g1 / r * delta + (g2 - g1 / r) * u[a] * u[b]);
        }
    }
    Ok(GreenJet {
        value: g,
        grad_x,
        grad_y,
        mixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(i: usize) -> Point3 {
        let mut e = Point3::zeros();
        e[i] = 1.0;
        e
    }

    #[test]
    fn unit_distance_values() {
        let x = Point3::new(0.3, -0.2, 0.1);
        let y = x + Point3::new(0.0, 0.6, 0.8);
        let g0 = free_space_green(&x, &y, 0.0).unwrap();
        assert!((g0.re - 1.0 / (4.0 * PI)).abs() < 1e-15 && g0.im.abs() < 1e-15);
        assert!((g0.re - 0.0795775).abs() < 1e-7);
        let gpi = free_space_green(&x, &y, PI).unwrap();
        assert!((gpi - Complex64::new(-1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reciprocity_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = Point3::from_fn(|_, _| rng.gen_range(-3.0..3.0));
            let y = Point3::from_fn(|_, _| rng.gen_range(-3.0..3.0));
            let k = rng.gen_range(0.1..5.0);
            assert_eq!(free_space_green(&x, &y, k).unwrap(), free_space_green(&y, &x, k).unwrap());
        }
    }

    #[test]
    fn static_kernel_properties() {
        let x = Point3::new(1.0, 2.0, 3.0);
        let y = x + Point3::new(2.0, 0.0, 0.0);
        assert!((static_green(&x, &y).unwrap() - 1.0 / (8.0 * PI)).abs() < 1e-16);
        assert_eq!(static_green(&x, &y).unwrap(), free_space_green(&x, &y, 0.0).unwrap().re);
        let s = static_green(&(2.0 * x), &(2.0 * y)).unwrap();
        assert!((s - static_green(&x, &y).unwrap() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn coincident_points_rejected() {
        let x = Point3::new(1.0, 1.0, 1.0);
        assert!(matches!(free_space_green(&x, &x, 1.0), Err(Error::CoincidentPoints)));
        assert!(matches!(static_green(&x, &x), Err(Error::CoincidentPoints)));
        let a = AnisotropicTensor::identity();
        assert!(anisotropic_static_green(&x, &x, &a).is_err());
    }

    #[test]
    fn anisotropic_reduces_to_static_for_identity() {
        let a = AnisotropicTensor::identity();
        let x = Point3::new(0.1, 0.7, -0.4);
        let y = Point3::new(-1.0, 0.2, 0.3);
        let lhs = anisotropic_static_green(&x, &y, &a).unwrap();
        assert!((lhs - static_green(&x, &y).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn anisotropic_hand_value() {
        // a = diag(4,1,1), d = (1,0,0): 1/(4π·2) · (1/4)^{-1/2} = 1/(4π)
        let a = AnisotropicTensor::new(Matrix3::from_diagonal(&Point3::new(4.0, 1.0, 1.0))).unwrap();
        let v = anisotropic_static_green(&unit(0), &Point3::zeros(), &a).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn anisotropic_operator_annihilates_kernel() {
        // finite-difference Σ a_ip ∂_i ∂_p G at a point away from the source
        let m = Matrix3::new(2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0);
        let a = AnisotropicTensor::new(m).unwrap();
        let y = Point3::zeros();
        let x = Point3::new(0.7, -0.4, 0.5);
        let f = |p: Point3| anisotropic_static_green(&p, &y, &a).unwrap();
        let residual = |h: f64| {
            let mut acc = 0.0;
            for i in 0..3 {
                for p in 0..3 {
                    let (ei, ep) = (unit(i) * h, unit(p) * h);
                    let d2 = (f(x + ei + ep) - f(x + ei - ep) - f(x - ei + ep) + f(x - ei - ep))
                        / (4.0 * h * h);
                    acc += m[(i, p)] * d2;
                }
            }
            acc.abs()
        };
        let (r1, r2) = (residual(1e-2), residual(5e-3));
        let scale = f(x) / x.norm_squared();
        assert!(r2 < 2e-3 * scale, "residual {r2}");
        // second-order stencil
        assert!(r1 / r2 > 3.0, "ratio {}", r1 / r2);
    }

    #[test]
    fn non_positive_tensor_rejected() {
        let m = Matrix3::from_diagonal(&Point3::new(1.0, -1.0, 1.0));
        assert!(AnisotropicTensor::new(m).is_err());
        let singular = Matrix3::from_diagonal(&Point3::new(1.0, 0.0, 1.0));
        assert!(AnisotropicTensor::new(singular).is_err());
        let skew = Matrix3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(AnisotropicTensor::new(skew).is_err());
    }

    #[test]
    fn jet_matches_finite_differences() {
        let k = 1.7;
        let x = Point3::new(0.4, -0.3, 0.9);
        let y = Point3::new(-0.2, 0.5, 0.1);
        let jet = free_space_jet(&x, &y, k).unwrap();
        let h = 1e-5;
        let g = |p: Point3, q: Point3| free_space_green(&p, &q, k).unwrap();
        for a in 0..3 {
            let e = unit(a) * h;
            let gx = (g(x + e, y) - g(x - e, y)) / (2.0 * h);
            let gy = (g(x, y + e) - g(x, y - e)) / (2.0 * h);
            assert!((gx - jet.grad_x[a]).norm() < 1e-8 * jet.grad_x[a].norm().max(1.0));
            assert!((gy - jet.grad_y[a]).norm() < 1e-8 * jet.grad_y[a].norm().max(1.0));
            for b in 0..3 {
                let f = unit(b) * 1e-4;
                let m = (g(x + unit(a) * 1e-4, y + f) - g(x + unit(a) * 1e-4, y - f)
                    - g(x - unit(a) * 1e-4, y + f)
                    + g(x - unit(a) * 1e-4, y - f))
                    / (4.0 * 1e-8);
                assert!((m - jet.mixed[a][b]).norm() < 1e-5, "mixed {a}{b}");
            }
        }
    }

    #[test]
    fn radiation_condition_trend() {
        // |∂g/∂r - ik g| r -> 0 as r grows
        let k = 2.0;
        let y = Point3::new(0.1, 0.2, -0.1);
        let dir = Point3::new(1.0, 2.0, 2.0) / 3.0;
        let mut last = f64::INFINITY;
        for r in [10.0, 20.0, 40.0, 80.0, 100.0] {
            let x = dir * r;
            let jet = free_space_jet(&x, &y, k).unwrap();
            let dr: Complex64 = (0..3).map(|a| jet.grad_x[a] * dir[a]).sum();
            let defect = (dr - Complex64::new(0.0, k) * jet.value).norm() * r;
            assert!(defect < last);
            last = defect;
        }
        assert!(last < 1e-3);
    }
}
