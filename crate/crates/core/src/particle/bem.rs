//! Panel-collocation boundary elements for the static surface equations.
//!
//! Unknowns are piecewise constant on flat triangles and collocated at panel
//! centroids. Off-diagonal entries use the one-point rule, switched to a
//! seven-point rule for panels closer than a few panel diameters.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;
use rayon::prelude::*;

use super::mesh::TriMesh;
use crate::linalg::DenseLu;
use crate::{Error, Point3, Result};

/// Panels whose centroid distance is below this multiple of
/// `sqrt(area)` are integrated with the seven-point rule.
const NEAR_FACTOR: f64 = 3.0;

// Dunavant degree-5 rule: (barycentric a, b, c, weight)
const TRI7: [(f64, f64, f64, f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506_2;
    const W2: f64 = 0.125_939_180_544_827_1;
    [
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, W0),
        (A1, B1, B1, W1),
        (B1, A1, B1, W1),
        (B1, B1, A1, W1),
        (A2, B2, B2, W2),
        (B2, A2, B2, W2),
        (B2, B2, A2, W2),
    ]
};

fn panel_integral(mesh: &TriMesh, i: usize, j: usize, kernel: impl Fn(&Point3) -> f64) -> f64 {
    let target = mesh.centroids()[i];
    let source = mesh.centroids()[j];
    let area = mesh.areas()[j];
    if (target - source).norm() > NEAR_FACTOR * area.sqrt() {
        return kernel(&source) * area;
    }
    let [a, b, c] = mesh.triangles()[j].map(|v| mesh.vertices()[v]);
    TRI7.iter()
        .map(|&(l0, l1, l2, w)| w * kernel(&(a * l0 + b * l1 + c * l2)))
        .sum::<f64>()
        * area
}

fn assemble(n: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> DMatrix<f64> {
    let data: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|j| (0..n).map(move |i| (i, j)).collect::<Vec<_>>())
        .map(|(i, j)| entry(i, j))
        .collect();
    DMatrix::from_vec(n, n, data)
}

/// Collocation matrix of the single layer `∫ g0(s, t) σ(t) dt`, with the
/// equivalent-disk value `sqrt(A/π)/2` on the diagonal.
pub fn single_layer_matrix(mesh: &TriMesh) -> DMatrix<f64> {
    assemble(mesh.panel_count(), |i, j| {
        if i == j {
            (mesh.areas()[i] / PI).sqrt() / 2.0
        } else {
            let s = mesh.centroids()[i];
            panel_integral(mesh, i, j, |t| 1.0 / (4.0 * PI * (s - t).norm()))
        }
    })
}

/// Collocation matrix of `(Aσ)(s) = 2 ∫ ∂g0(s, t)/∂N_s σ(t) dt` with a zero
/// self term.
pub fn double_layer_matrix(mesh: &TriMesh) -> DMatrix<f64> {
    assemble(mesh.panel_count(), |i, j| {
        if i == j {
            0.0
        } else {
            let s = mesh.centroids()[i];
            let n = mesh.normals()[i];
            panel_integral(mesh, i, j, |t| {
                let d = s - t;
                let r = d.norm();
                -2.0 * n.dot(&d) / (4.0 * PI * r * r * r)
            })
        }
    })
}

/// Equilibrium charge problem on a mesh.
pub struct CapacitanceSolve {
    pub capacitance: f64,
    /// Panel densities for unit potential `u_e = 1` (so `∫σ = -C`).
    pub unit_density: Vec<f64>,
    /// `∫ (s - origin) σ ds` for `u_e = 1`.
    pub unit_moment: Point3,
    pub pivot_ratio: f64,
}

pub fn solve_capacitance(mesh: &TriMesh, origin: &Point3) -> Result<CapacitanceSolve> {
    let lu = DenseLu::factor(single_layer_matrix(mesh))
        .map_err(|e| Error::Singular(format!("single-layer BEM matrix: {e}")))?;
    let rhs = DVector::from_element(mesh.panel_count(), -1.0);
    let sigma = lu.solve(&rhs)?;
    let unit_density: Vec<f64> = sigma.iter().copied().collect();
    let charge: f64 = unit_density.iter().zip(mesh.areas()).map(|(s, a)| s * a).sum();
    let unit_moment = unit_density
        .iter()
        .zip(mesh.areas())
        .zip(mesh.centroids())
        .fold(Point3::zeros(), |acc, ((s, a), c)| acc + (c - origin) * (s * a));
    if !(charge < 0.0) {
        return Err(Error::Singular(format!("BEM capacitance is not positive ({})", -charge)));
    }
    Ok(CapacitanceSolve {
        capacitance: -charge,
        unit_density,
        unit_moment,
        pivot_ratio: lu.pivot_ratio(),
    })
}

pub fn capacitance_bem(mesh: &TriMesh) -> Result<f64> {
    Ok(solve_capacitance(mesh, &Point3::zeros())?.capacitance)
}

/// Solves `(I - A) h_p = -2 N_p` for `p = 1, 2, 3` and returns
/// `β_pq = (1/V) ∫ (s - origin)_q h_p ds`.
pub fn polarizability_bem(mesh: &TriMesh, origin: &Point3) -> Result<Matrix3<f64>> {
    let n = mesh.panel_count();
    let a = double_layer_matrix(mesh);
    let system = DMatrix::<f64>::identity(n, n) - a;
    let lu = DenseLu::factor(system).map_err(|e| Error::Singular(format!("(I - A) BEM matrix: {e}")))?;
    let volume = mesh.signed_volume();
    let mut beta = Matrix3::zeros();
    for p in 0..3 {
        let rhs = DVector::from_iterator(n, mesh.normals().iter().map(|nv| -2.0 * nv[p]));
        let h = lu.solve(&rhs)?;
        for q in 0..3 {
            beta[(p, q)] = (0..n)
                .map(|i| (mesh.centroids()[i][q] - origin[q]) * h[i] * mesh.areas()[i])
                .sum::<f64>()
                / volume;
        }
    }
    Ok(beta)
}

/// `|∫(Aσ) ds + ∫σ ds| / ∫|σ| ds` for the discretized double layer.
pub fn double_layer_identity_residual(mesh: &TriMesh, sigma: &[f64]) -> Result<f64> {
    if sigma.len() != mesh.panel_count() {
        return Err(Error::InvalidInput("density length differs from panel count".into()));
    }
    let a = double_layer_matrix(mesh);
    let s = DVector::from_column_slice(sigma);
    let a_s = &a * &s;
    let areas = mesh.areas();
    let lhs: f64 = (0..sigma.len()).map(|i| (a_s[i] + s[i]) * areas[i]).sum();
    let scale: f64 = (0..sigma.len()).map(|i| s[i].abs() * areas[i]).sum();
    Ok(lhs.abs() / scale)
}

/// Panel densities solving `∫ g0 σ = -u_e` on a mesh.
pub fn dirichlet_density_bem(mesh: &TriMesh, u_e: Complex64) -> Result<Vec<Complex64>> {
    let unit = solve_capacitance(mesh, &Point3::zeros())?.unit_density;
    Ok(unit.into_iter().map(|s| u_e * s).collect())
}
