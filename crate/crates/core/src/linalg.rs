//! Dense factorizations and a restarted GMRES for the complex systems used
//! throughout the crate.

use nalgebra::{ComplexField, DMatrix, DVector, LU};
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense LU factorization with a pivot-growth diagnostic.
pub struct DenseLu<T: ComplexField> {
    lu: LU<T, nalgebra::Dyn, nalgebra::Dyn>,
    pivot_ratio: f64,
    min_pivot: f64,
}

/// Pivot ratios below this are treated as numerically singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

impl<T: ComplexField<RealField = f64>> DenseLu<T> {
    pub fn factor(matrix: DMatrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "LU of a non-square {}x{} matrix",
                n,
                matrix.ncols()
            )));
        }
        let lu = LU::new(matrix);
        let packed = lu.lu_internal();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let p = packed[(i, i)].clone().modulus();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let pivot_ratio = if n == 0 { 1.0 } else { lo / hi };
        if n > 0 && !(pivot_ratio > SINGULAR_PIVOT_RATIO) {
            return Err(Error::Singular(format!(
                "smallest pivot {lo:.3e}, pivot ratio {pivot_ratio:.3e}"
            )));
        }
        Ok(Self {
            lu,
            pivot_ratio,
            min_pivot: if n == 0 { 0.0 } else { lo },
        })
    }

    pub fn solve(&self, rhs: &DVector<T>) -> Result<DVector<T>> {
        self.lu
            .solve(rhs)
            .ok_or_else(|| Error::Singular("LU back-substitution failed".into()))
    }

    pub fn solve_slice(&self, rhs: &[T]) -> Result<Vec<T>> {
        let b = DVector::from_column_slice(rhs);
        Ok(self.solve(&b)?.as_slice().to_vec())
    }

    /// `min |u_ii| / max |u_ii|`: a cheap (and optimistic) inverse condition
    /// estimate.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Restarted GMRES(m) for `A x = b` with `A` given as a matrix-vector product.
///
/// All reductions run sequentially in index order, so the result does not
/// depend on how `apply` parallelizes internally as long as it is itself
/// deterministic.
pub fn gmres<F>(apply: F, b: &[Complex64], tol: f64, restart: usize, max_iter: usize) -> GmresOutcome
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return GmresOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let m = restart.max(1).min(n.max(1));
    let mut total = 0;
    let mut rel = 1.0;
    while total < max_iter {
        let ax = apply(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= tol {
            return GmresOutcome {
                solution: x,
                iterations: total,
                relative_residual: rel,
                converged: true,
            };
        }
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|z| z / beta).collect());
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            if total >= max_iter {
                break;
            }
            total += 1;
            let mut w = apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                let hij = dotc(v, &w);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wnorm = norm2(&w);
            h[j + 1][j] = Complex64::new(wnorm, 0.0);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * h[j + 1][j];
            h[j + 1][j] = Complex64::new(0.0, 0.0);
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            used = j + 1;
            rel = g[j + 1].norm() / bnorm;
            if rel <= tol || wnorm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|z| z / wnorm).collect());
        }
        // back substitution on the triangular Hessenberg block
        let mut y = vec![Complex64::new(0.0, 0.0); used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for k in i + 1..used {
                acc -= h[i][k] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[k]) {
                *xi += yk * vi;
            }
        }
        if rel <= tol {
            let ax = apply(&x);
            let true_rel = norm2(
                &b.iter()
                    .zip(&ax)
                    .map(|(bi, ai)| bi - ai)
                    .collect::<Vec<_>>(),
            ) / bnorm;
            if true_rel <= tol * 10.0 {
                return GmresOutcome {
                    solution: x,
                    iterations: total,
                    relative_residual: true_rel,
                    converged: true,
                };
            }
            rel = true_rel;
        }
    }
    GmresOutcome {
        solution: x,
        iterations: total,
        relative_residual: rel,
        converged: false,
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}
