use num_complex::Complex64;

use super::EffectivePotential;
use crate::greens::{BackgroundMedium, GridSpec};
use crate::{Error, Result};

/// Below this many nodes per wavelength the residual is reported as
/// under-resolved.
pub const MIN_NODES_PER_WAVELENGTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `‖Δ_h U + (k² - q) U‖ / ‖U‖` over interior nodes.
    pub residual: f64,
    pub interior_nodes: usize,
    pub nodes_per_wavelength: f64,
    pub under_resolved: bool,
}

/// Discrete residual of `[∇² + k² - q(x)] U = 0` (equivalently
/// `∇²U + k² n U = C U`) with the 7-point Laplacian at interior nodes.
pub fn schrodinger_residual(
    grid: &GridSpec,
    field: &[Complex64],
    medium: &BackgroundMedium,
    potential: &EffectivePotential,
) -> Result<ResidualReport> {
    if field.len() != grid.len() || potential.grid() != grid {
        return Err(Error::InvalidInput("field, potential and grid must match".into()));
    }
    if grid.dims.iter().any(|&n| n < 3) {
        return Err(Error::InvalidInput("the residual needs at least 3 nodes per axis".into()));
    }
    let h = grid.spacing();
    let k2 = medium.k() * medium.k();
    let npw = medium.nodes_per_wavelength(grid.max_spacing());
    let under_resolved = npw < MIN_NODES_PER_WAVELENGTH;
    if under_resolved {
        log::warn!("grid has {npw:.2} nodes per wavelength (< {MIN_NODES_PER_WAVELENGTH})");
    }
    let q = potential.values();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0;
    for i in 1..grid.dims[0] - 1 {
        for j in 1..grid.dims[1] - 1 {
            for l in 1..grid.dims[2] - 1 {
                let c = grid.index([i, j, l]);
                let u = field[c];
                let mut lap = Complex64::new(0.0, 0.0);
                for (a, ha) in h.iter().enumerate() {
                    let mut up = [i, j, l];
                    let mut down = [i, j, l];
                    up[a] += 1;
                    down[a] -= 1;
                    lap += (field[grid.index(up)] - 2.0 * u + field[grid.index(down)]) / (ha * ha);
                }
                num += (lap + (k2 - q[c]) * u).norm_sqr();
                den += u.norm_sqr();
                count += 1;
            }
        }
    }
    Ok(ResidualReport {
        residual: if den > 0.0 { (num / den).sqrt() } else { 0.0 },
        interior_nodes: count,
        nodes_per_wavelength: npw,
        under_resolved,
    })
}
