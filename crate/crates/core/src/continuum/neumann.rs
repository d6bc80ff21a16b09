use std::sync::Arc;

use num_complex::Complex64;

use super::{ContinuumField, LimitDiagnostics, LimitStatus, Representation, ScalarDensity, TensorDensity};
use crate::greens::volume::{ConvolutionKernel, VolumePotential};
use crate::greens::{free_space_jet, BackgroundMedium, GridSpec, IncidentField};
use crate::linalg::norm2;
use crate::{CVec3, Error, Point3, Result, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannLimitOptions {
    pub max_iter: usize,
    /// Stop when `‖U⁽ⁿ⁺¹⁾ - U⁽ⁿ⁾‖ <= tol ‖U⁽ⁿ⁺¹⁾‖`.
    pub tol: f64,
}

impl Default for NeumannLimitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-10,
        }
    }
}

/// Consecutive growing steps that declare divergence.
const GROWTH_LIMIT: usize = 5;

/// Centered differences on the cell-center grid, one-sided at the faces.
fn gradient(grid: &GridSpec, u: &[Complex64]) -> Vec<CVec3> {
    let h = grid.spacing();
    let dims = grid.dims;
    (0..grid.len())
        .map(|idx| {
            let ijk = grid.ijk(idx);
            let mut g = [ZERO; 3];
            for a in 0..3 {
                let n = dims[a];
                if n < 2 {
                    continue;
                }
                let at = |i: usize| {
                    let mut c = ijk;
                    c[a] = i;
                    u[grid.index(c)]
                };
                let i = ijk[a];
                g[a] = if i == 0 {
                    if n >= 3 {
                        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h[a])
                    } else {
                        (at(1) - at(0)) / h[a]
                    }
                } else if i == n - 1 {
                    if n >= 3 {
                        (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h[a])
                    } else {
                        (at(n - 1) - at(n - 2)) / h[a]
                    }
                } else {
                    (at(i + 1) - at(i - 1)) / (2.0 * h[a])
                };
            }
            g
        })
        .collect()
}

/// Solves `U = U0 + ∫ G [ΔU - ik Σ ν_q β_qp ∂_p U] v dy` by fixed-point
/// iteration from `U0`, with `ΔU = -k² n U` and `ik ν_q G = ∂_{y_q} G`.
///
/// Only a homogeneous background is supported.
pub fn solve_neumann_limit(
    medium: &BackgroundMedium,
    incident: &IncidentField,
    v: &ScalarDensity,
    beta: &TensorDensity,
    options: NeumannLimitOptions,
) -> Result<ContinuumField> {
    if !medium.is_homogeneous() {
        return Err(Error::Unsupported(
            "the Neumann limit solver supports a homogeneous background only".into(),
        ));
    }
    if v.grid() != beta.grid() {
        return Err(Error::InvalidInput("volume and polarizability densities use different grids".into()));
    }
    let grid = v.grid().clone();
    let k = medium.k();
    let w = grid.cell_volume();
    let h = grid.spacing();
    let potential = Arc::new(VolumePotential::new(grid.clone(), k));
    let grad_kernels: Vec<ConvolutionKernel> = (0..3)
        .map(|q| {
            ConvolutionKernel::new(grid.dims, |off| {
                if off == [0, 0, 0] {
                    return ZERO;
                }
                let d = Point3::new(off[0] as f64 * h[0], off[1] as f64 * h[1], off[2] as f64 * h[2]);
                free_space_jet(&d, &Point3::zeros(), k).expect("nonzero offset").grad_y[q] * w
            })
        })
        .collect();

    let centers = grid.centers();
    let u0: Vec<Complex64> = centers.iter().map(|p| incident.eval(p)).collect();
    let sources = |u: &[Complex64]| -> (Vec<Complex64>, Vec<CVec3>) {
        let grad = gradient(&grid, u);
        let mono = u
            .iter()
            .zip(v.values())
            .map(|(ui, vi)| -k * k * vi * ui)
            .collect();
        let dip = grad
            .iter()
            .zip(v.values())
            .zip(beta.values())
            .map(|((g, vi), b)| {
                [0, 1, 2].map(|q| {
                    let mut s = ZERO;
                    for p in 0..3 {
                        s += g[p] * b[(q, p)];
                    }
                    s * *vi
                })
            })
            .collect();
        (mono, dip)
    };
    let step_map = |u: &[Complex64]| -> Vec<Complex64> {
        let (mono, dip) = sources(u);
        let mut out = potential.apply(&mono);
        for (q, kq) in grad_kernels.iter().enumerate() {
            let comp: Vec<Complex64> = dip.iter().map(|d| d[q]).collect();
            for (o, t) in out.iter_mut().zip(kq.apply(&comp)) {
                *o -= t;
            }
        }
        for (o, a) in out.iter_mut().zip(&u0) {
            *o += a;
        }
        out
    };

    let mut u = u0.clone();
    let mut iterations = 0;
    let mut status = LimitStatus::Diverged;
    let mut prev = f64::INFINITY;
    let mut growth = 0;
    let mut last_step = f64::INFINITY;
    while iterations < options.max_iter {
        let next = step_map(&u);
        iterations += 1;
        let diff: Vec<Complex64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let size = norm2(&next);
        last_step = if size > 0.0 { norm2(&diff) / size } else { 0.0 };
        u = next;
        if !last_step.is_finite() {
            break;
        }
        if last_step <= options.tol {
            status = LimitStatus::Converged;
            break;
        }
        growth = if last_step > prev { growth + 1 } else { 0 };
        prev = last_step;
        if growth >= GROWTH_LIMIT {
            log::warn!("Neumann limit iteration diverges; reduce the volume density");
            break;
        }
    }
    let (mono, dip) = sources(&u);
    Ok(ContinuumField {
        grid,
        nodal: u,
        repr: Representation::Sources { potential, mono, dip },
        incident: incident.clone(),
        diagnostics: LimitDiagnostics {
            iterations,
            status,
            last_step,
            pivot_ratio: None,
        },
    })
}
