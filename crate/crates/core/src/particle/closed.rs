//! Closed forms for spheres and ellipsoids via Carlson's symmetric integrals.

use std::f64::consts::PI;

use nalgebra::Matrix3;

/// Carlson's `R_F(x, y, z)` by the duplication theorem.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..200 {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let mean = (x + y + z) / 3.0;
        let (dx, dy, dz) = (1.0 - x / mean, 1.0 - y / mean, 1.0 - z / mean);
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mean.sqrt();
        }
    }
    unreachable!("Carlson R_F duplication did not converge")
}

/// Carlson's `R_D(x, y, z) = R_J(x, y, z, z)`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    for _ in 0..200 {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        sum += fac / (sz * (z + lambda));
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let mean = (x + y + 3.0 * z) / 5.0;
        let (dx, dy, dz) = (1.0 - x / mean, 1.0 - y / mean, 1.0 - z / mean);
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let series = 1.0
                + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 9.0 / 52.0 * dz * ee)
                + dz * (ee / 6.0 + dz * (-9.0 / 22.0 * ec + dz * 3.0 / 26.0 * ea));
            return 3.0 * sum + fac * series / (mean * mean.sqrt());
        }
    }
    unreachable!("Carlson R_D duplication did not converge")
}

pub fn sphere_capacitance(a: f64) -> f64 {
    4.0 * PI * a
}

pub fn sphere_volume(a: f64) -> f64 {
    4.0 / 3.0 * PI * a.powi(3)
}

/// Isotropic value of the sphere polarizability tensor.
pub const SPHERE_BETA: f64 = -1.5;

pub fn ellipsoid_capacitance(axes: [f64; 3]) -> f64 {
    let [a, b, c] = axes;
    4.0 * PI / carlson_rf(a * a, b * b, c * c)
}

pub fn ellipsoid_volume(axes: [f64; 3]) -> f64 {
    4.0 / 3.0 * PI * axes[0] * axes[1] * axes[2]
}

/// Demagnetizing factors `n_p`, summing to one.
pub fn depolarization_factors(axes: [f64; 3]) -> [f64; 3] {
    let sq = axes.map(|a| a * a);
    let prod = axes[0] * axes[1] * axes[2];
    [0, 1, 2].map(|p| {
        let (q, r) = ((p + 1) % 3, (p + 2) % 3);
        prod / 3.0 * carlson_rd(sq[q], sq[r], sq[p])
    })
}

/// `β = diag(-1 / (1 - n_p))` in the principal frame.
pub fn ellipsoid_polarizability(axes: [f64; 3]) -> Matrix3<f64> {
    let n = depolarization_factors(axes);
    Matrix3::from_diagonal(&nalgebra::Vector3::new(
        -1.0 / (1.0 - n[0]),
        -1.0 / (1.0 - n[1]),
        -1.0 / (1.0 - n[2]),
    ))
}
