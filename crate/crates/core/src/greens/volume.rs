//! Nyström discretization of volume potentials `∫_D g(x, ξ) f(ξ) dξ` on a
//! uniform cell grid.
//!
//! Off-diagonal entries use the midpoint rule. The self cell and its 26
//! neighbours use the exact cell integral of `g`: the static part from the
//! closed-form Newtonian potential of a box, the smooth remainder
//! `(e^{ikr} - 1) / (4πr)` by tensor Gauss quadrature. Because the grid is
//! uniform, the discretized operator is a block-Toeplitz convolution and is
//! applied with zero-padded FFTs.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::GridSpec;
use super::kernels::green_at_distance;
use crate::linalg::{gmres, DenseLu};
use crate::{Error, Point3, Result, ZERO};

/// `∫_{[lo, hi]} dξ / |x - ξ|` in closed form.
pub fn box_newton_potential(x: &Point3, lo: &Point3, hi: &Point3) -> f64 {
    let mut acc = 0.0;
    for corner in 0..8usize {
        let mut c = [0.0; 3];
        let mut lower = 0;
        for a in 0..3 {
            if (corner >> a) & 1 == 1 {
                c[a] = hi[a] - x[a];
            } else {
                c[a] = lo[a] - x[a];
                lower += 1;
            }
        }
        let sign = if lower % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * antiderivative(c[0], c[1], c[2]);
    }
    acc
}

// ∂³F/∂u∂v∂w = 1/sqrt(u² + v² + w²)
fn antiderivative(u: f64, v: f64, w: f64) -> f64 {
    let r = (u * u + v * v + w * w).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    let term = |a: f64, b: f64, c: f64| {
        let mut t = 0.0;
        let rho = a.hypot(b);
        if a != 0.0 && b != 0.0 && rho > 0.0 {
            t += a * b * (c / rho).asinh();
        }
        if c != 0.0 {
            t -= 0.5 * c * c * (a * b / (c * r)).atan();
        }
        t
    };
    term(v, w, u) + term(u, w, v) + term(u, v, w)
}

const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// `∫_cell g(x, ξ) dξ` over the axis-aligned cell with the given center and
/// side lengths; exact static part plus Gauss quadrature of the bounded
/// remainder.
pub fn cell_integral_green(x: &Point3, center: &Point3, h: [f64; 3], k: f64) -> Complex64 {
    let half = Point3::new(h[0] / 2.0, h[1] / 2.0, h[2] / 2.0);
    let lo = center - half;
    let hi = center + half;
    let stat = box_newton_potential(x, &lo, &hi) / (4.0 * PI);
    if k == 0.0 {
        return Complex64::new(stat, 0.0);
    }
    // (e^{ikr} - 1)/(4πr) is bounded but only Lipschitz at r = 0; split the
    // cell in 2³ sub-cells to keep the kink away from most Gauss nodes.
    let mut dynamic = ZERO;
    for sub in 0..8usize {
        let mut sc = Point3::zeros();
        for a in 0..3 {
            sc[a] = center[a] + if (sub >> a) & 1 == 1 { h[a] / 4.0 } else { -h[a] / 4.0 };
        }
        for (xi, wi) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
            for (yj, wj) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
                for (zl, wl) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
                    let p = Point3::new(
                        sc.x + xi * h[0] / 4.0,
                        sc.y + yj * h[1] / 4.0,
                        sc.z + zl * h[2] / 4.0,
                    );
                    let r = (p - x).norm();
                    let f = if r < 1e-300 {
                        Complex64::new(0.0, k / (4.0 * PI))
                    } else {
                        (Complex64::from_polar(1.0, k * r) - 1.0) / (4.0 * PI * r)
                    };
                    dynamic += f * (wi * wj * wl);
                }
            }
        }
    }
    dynamic *= h[0] * h[1] * h[2] / 64.0;
    Complex64::new(stat, 0.0) + dynamic
}

fn plan_axis(planner: &mut FftPlanner<f64>, n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// Discrete convolution `y_i = Σ_j K(i - j) x_j` over a 3-D index box,
/// applied with zero-padded FFTs.
pub struct ConvolutionKernel {
    dims: [usize; 3],
    padded: [usize; 3],
    table: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl ConvolutionKernel {
    /// `entry(offset)` is called once for every offset in
    /// `[-(n_a - 1), n_a - 1]` per axis.
    pub fn new<F>(dims: [usize; 3], entry: F) -> Self
    where
        F: Fn([isize; 3]) -> Complex64 + Sync,
    {
        let span = dims.map(|n| 2 * n - 1);
        let table: Vec<Complex64> = (0..span[0] * span[1] * span[2])
            .into_par_iter()
            .map(|idx| {
                let c = idx % span[2];
                let rest = idx / span[2];
                let (a, b) = (rest / span[1], rest % span[1]);
                entry([
                    a as isize - (dims[0] as isize - 1),
                    b as isize - (dims[1] as isize - 1),
                    c as isize - (dims[2] as isize - 1),
                ])
            })
            .collect();
        let padded = dims.map(|n| 2 * n);
        let mut planner = FftPlanner::new();
        let plans = padded.map(|n| plan_axis(&mut planner, n));
        let forward = [plans[0].0.clone(), plans[1].0.clone(), plans[2].0.clone()];
        let inverse = [plans[0].1.clone(), plans[1].1.clone(), plans[2].1.clone()];
        let mut kernel = Self {
            dims,
            padded,
            table,
            spectrum: Vec::new(),
            forward,
            inverse,
        };
        let mut embedded = vec![ZERO; padded[0] * padded[1] * padded[2]];
        for a in -(dims[0] as isize - 1)..dims[0] as isize {
            for b in -(dims[1] as isize - 1)..dims[1] as isize {
                for c in -(dims[2] as isize - 1)..dims[2] as isize {
                    let pi = a.rem_euclid(padded[0] as isize) as usize;
                    let pj = b.rem_euclid(padded[1] as isize) as usize;
                    let pk = c.rem_euclid(padded[2] as isize) as usize;
                    embedded[(pi * padded[1] + pj) * padded[2] + pk] = kernel.entry([a, b, c]);
                }
            }
        }
        kernel.fft3(&mut embedded, true);
        kernel.spectrum = embedded;
        kernel
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entry(&self, offset: [isize; 3]) -> Complex64 {
        let span = self.dims.map(|n| 2 * n - 1);
        let a = (offset[0] + self.dims[0] as isize - 1) as usize;
        let b = (offset[1] + self.dims[1] as isize - 1) as usize;
        let c = (offset[2] + self.dims[2] as isize - 1) as usize;
        self.table[(a * span[1] + b) * span[2] + c]
    }

    fn offset(&self, i: usize, j: usize) -> [isize; 3] {
        let split = |idx: usize| {
            let l = idx % self.dims[2];
            let rest = idx / self.dims[2];
            [rest / self.dims[1], rest % self.dims[1], l]
        };
        let (a, b) = (split(i), split(j));
        [0, 1, 2].map(|t| a[t] as isize - b[t] as isize)
    }

    /// Matrix entry `K(i - j)` for linear indices.
    pub fn matrix_entry(&self, i: usize, j: usize) -> Complex64 {
        self.entry(self.offset(i, j))
    }

    fn fft3(&self, data: &mut [Complex64], forward: bool) {
        let p = self.padded;
        let plans = if forward { &self.forward } else { &self.inverse };
        // axis 2 (contiguous)
        data.par_chunks_mut(p[2]).for_each(|row| plans[2].process(row));
        // axis 1
        data.par_chunks_mut(p[1] * p[2]).for_each(|slab| {
            let mut buf = vec![ZERO; p[1]];
            for c in 0..p[2] {
                for b in 0..p[1] {
                    buf[b] = slab[b * p[2] + c];
                }
                plans[1].process(&mut buf);
                for b in 0..p[1] {
                    slab[b * p[2] + c] = buf[b];
                }
            }
        });
        // axis 0
        let stride = p[1] * p[2];
        let columns: Vec<Vec<Complex64>> = (0..stride)
            .into_par_iter()
            .map(|bc| {
                let mut buf: Vec<Complex64> = (0..p[0]).map(|a| data[a * stride + bc]).collect();
                plans[0].process(&mut buf);
                buf
            })
            .collect();
        for (bc, col) in columns.into_iter().enumerate() {
            for (a, v) in col.into_iter().enumerate() {
                data[a * stride + bc] = v;
            }
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.len());
        let (d, p) = (self.dims, self.padded);
        let mut buf = vec![ZERO; p[0] * p[1] * p[2]];
        for i in 0..d[0] {
            for j in 0..d[1] {
                let src = (i * d[1] + j) * d[2];
                let dst = (i * p[1] + j) * p[2];
                buf[dst..dst + d[2]].copy_from_slice(&x[src..src + d[2]]);
            }
        }
        self.fft3(&mut buf, true);
        buf.par_iter_mut()
            .zip(self.spectrum.par_iter())
            .for_each(|(b, s)| *b *= s);
        self.fft3(&mut buf, false);
        let scale = 1.0 / (p[0] * p[1] * p[2]) as f64;
        let mut out = vec![ZERO; x.len()];
        for i in 0..d[0] {
            for j in 0..d[1] {
                let dst = (i * d[1] + j) * d[2];
                let src = (i * p[1] + j) * p[2];
                for l in 0..d[2] {
                    out[dst + l] = buf[src + l] * scale;
                }
            }
        }
        out
    }

    /// O(N²) reference product.
    pub fn apply_direct(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .into_par_iter()
            .map(|i| {
                x.iter()
                    .enumerate()
                    .map(|(j, xj)| self.matrix_entry(i, j) * xj)
                    .sum()
            })
            .collect()
    }
}

/// Radius (in cells, sup-norm) within which the exact cell integral replaces
/// the midpoint rule.
const NEAR_CELLS: isize = 1;

/// Volume-potential operator `(V f)(ξ_i) = Σ_j ∫_{cell_j} g(ξ_i, ξ) dξ f_j` on
/// a uniform grid.
pub struct VolumePotential {
    grid: GridSpec,
    k: f64,
    kernel: ConvolutionKernel,
}

impl VolumePotential {
    pub fn new(grid: GridSpec, k: f64) -> Self {
        let h = grid.spacing();
        let w = grid.cell_volume();
        let kernel = ConvolutionKernel::new(grid.dims, |off| {
            let d = Point3::new(off[0] as f64 * h[0], off[1] as f64 * h[1], off[2] as f64 * h[2]);
            if off.iter().all(|o| o.abs() <= NEAR_CELLS) {
                cell_integral_green(&Point3::zeros(), &d, h, k)
            } else {
                green_at_distance(d.norm(), k) * w
            }
        });
        Self { grid, k, kernel }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kernel(&self) -> &ConvolutionKernel {
        &self.kernel
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.kernel.apply(f)
    }

    /// Quadrature weight of cell `j` for the potential at an arbitrary point.
    pub fn weight_at(&self, x: &Point3, j: usize) -> Complex64 {
        let ijk = self.grid.ijk(j);
        let c = self.grid.center_of(ijk);
        if self.is_near(x, ijk) {
            cell_integral_green(x, &c, self.grid.spacing(), self.k)
        } else {
            green_at_distance((x - c).norm(), self.k) * self.grid.cell_volume()
        }
    }

    fn is_near(&self, x: &Point3, ijk: [usize; 3]) -> bool {
        let h = self.grid.spacing();
        let c = self.grid.center_of(ijk);
        (0..3).all(|a| (x[a] - c[a]).abs() <= (NEAR_CELLS as f64 + 0.5) * h[a])
    }

    /// `Σ_j ∫_{cell_j} g(x, ξ) dξ f_j` at an arbitrary point.
    pub fn potential_at(&self, x: &Point3, f: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for (j, fj) in f.iter().enumerate() {
            if *fj != ZERO {
                acc += self.weight_at(x, j) * fj;
            }
        }
        acc
    }
}

/// Largest node count factorized densely; bigger systems use GMRES.
pub const DENSE_LIMIT: usize = 1000;

enum Backend {
    Dense(DenseLu<Complex64>),
    Iterative,
}

/// The discretized Lippmann–Schwinger operator `u + V(q u)` with a real
/// potential `q` sampled at the cell centers.
pub struct LippmannSchwinger {
    potential: VolumePotential,
    q: Vec<f64>,
    backend: Backend,
    gmres_tol: f64,
}

impl LippmannSchwinger {
    pub fn new(potential: VolumePotential, q: Vec<f64>) -> Result<Self> {
        Self::with_backend(potential, q, None)
    }

    /// `force_dense = Some(true/false)` overrides the size-based choice.
    pub fn with_backend(potential: VolumePotential, q: Vec<f64>, force_dense: Option<bool>) -> Result<Self> {
        let n = potential.grid().len();
        if q.len() != n {
            return Err(Error::InvalidInput(format!(
                "potential has {} samples for {} cells",
                q.len(),
                n
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("potential contains non-finite values".into()));
        }
        let dense = force_dense.unwrap_or(n <= DENSE_LIMIT);
        let backend = if dense {
            let kernel = potential.kernel();
            let m = DMatrix::from_fn(n, n, |i, j| {
                let v = kernel.matrix_entry(i, j) * q[j];
                if i == j {
                    v + 1.0
                } else {
                    v
                }
            });
            Backend::Dense(DenseLu::factor(m).map_err(|e| match e {
                Error::Singular(msg) => {
                    Error::Singular(format!("discretized (I + T) is near-singular: {msg}"))
                }
                other => other,
            })?)
        } else {
            Backend::Iterative
        };
        Ok(Self {
            potential,
            q,
            backend,
            gmres_tol: 1e-12,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.potential.grid()
    }

    pub fn k(&self) -> f64 {
        self.potential.k()
    }

    pub fn potential(&self) -> &VolumePotential {
        &self.potential
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Inverse condition estimate from the LU pivots (`None` for GMRES).
    pub fn pivot_ratio(&self) -> Option<f64> {
        match &self.backend {
            Backend::Dense(lu) => Some(lu.pivot_ratio()),
            Backend::Iterative => None,
        }
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let qu: Vec<Complex64> = u.iter().zip(&self.q).map(|(a, b)| a * b).collect();
        let mut out = self.potential.apply(&qu);
        for (o, ui) in out.iter_mut().zip(u) {
            *o += ui;
        }
        out
    }

    /// Solve `u + V(q u) = b` at the nodes.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.backend {
            Backend::Dense(lu) => lu.solve_slice(b),
            Backend::Iterative => {
                let out = gmres(|x| self.apply(x), b, self.gmres_tol, 60, 3000);
                if !out.converged {
                    return Err(Error::SolverFailure(format!(
                        "GMRES stalled at relative residual {:.3e} after {} iterations",
                        out.relative_residual, out.iterations
                    )));
                }
                Ok(out.solution)
            }
        }
    }

    /// `-Σ_j ∫_{cell_j} g(x, ξ) dξ q_j u_j`: the volume term of the
    /// representation formula at an arbitrary point.
    pub fn scattered_at(&self, x: &Point3, nodal: &[Complex64]) -> Complex64 {
        let qu: Vec<Complex64> = nodal.iter().zip(&self.q).map(|(a, b)| a * b).collect();
        -self.potential.potential_at(x, &qu)
    }
}
