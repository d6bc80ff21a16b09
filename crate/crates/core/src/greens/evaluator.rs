use std::sync::Arc;

use num_complex::Complex64;

use super::kernels::{free_space_green, free_space_jet, GreenJet};
use super::medium::BackgroundMedium;
use super::volume::{LippmannSchwinger, VolumePotential};
use crate::{CVec3, Error, Point3, Result, ZERO};

/// Green function `G(x, y)` of `∇² + k² n(x)` with outgoing radiation
/// condition, from the Nyström solution of `G = g - ∫_D g q0 G`.
///
/// Immutable after construction; all evaluation methods take `&self`.
pub struct GreensEvaluator {
    medium: BackgroundMedium,
    volume: Option<Arc<LippmannSchwinger>>,
    fd_step: f64,
}

/// `G(x, y) / g(x, y)` with a flag raised when either point is not far from
/// the inhomogeneity (where the ratio need not approach 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldRatio {
    pub ratio: Complex64,
    pub near_domain: bool,
}

impl GreensEvaluator {
    pub fn homogeneous(k: f64) -> Result<Self> {
        Self::build(BackgroundMedium::homogeneous(k)?, 1)
    }

    /// Discretize on the medium grid refined `quadrature_order` times per
    /// axis and factorize `I + T` (GMRES above the dense size limit).
    pub fn build(medium: BackgroundMedium, quadrature_order: usize) -> Result<Self> {
        if quadrature_order == 0 {
            return Err(Error::InvalidInput("quadrature order must be at least 1".into()));
        }
        let (volume, fd_step) = match medium.domain() {
            Some(domain) if !medium.is_homogeneous() => {
                let grid = domain.refined(quadrature_order);
                let q: Vec<f64> = grid.centers().iter().map(|p| medium.potential_at(p)).collect();
                let fd_step = (grid.min_spacing() / 10.0).max(1e-4);
                let ls = LippmannSchwinger::new(VolumePotential::new(grid, medium.k()), q)?;
                if let Some(r) = ls.pivot_ratio() {
                    log::debug!("Green evaluator: LU pivot ratio {r:.3e}");
                }
                (Some(Arc::new(ls)), fd_step)
            }
            _ => (None, 1e-4),
        };
        Ok(Self {
            medium,
            volume,
            fd_step,
        })
    }

    pub fn medium(&self) -> &BackgroundMedium {
        &self.medium
    }

    pub fn k(&self) -> f64 {
        self.medium.k()
    }

    /// True when `G ≡ g` (no volume operator).
    pub fn is_homogeneous(&self) -> bool {
        self.volume.is_none()
    }

    pub(crate) fn volume(&self) -> Option<&Arc<LippmannSchwinger>> {
        self.volume.as_ref()
    }

    /// Finite-difference step used for derivatives of the numerical `G`.
    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    /// LU pivot ratio of the discretized `I + T` (a condition estimate).
    pub fn pivot_ratio(&self) -> Option<f64> {
        self.volume.as_ref().and_then(|v| v.pivot_ratio())
    }

    /// `G(·, source)`: solves the discretized integral equation once, then
    /// evaluates anywhere through the representation formula.
    pub fn column(&self, source: &Point3) -> Result<GreenColumn> {
        let nodal = match &self.volume {
            None => Vec::new(),
            Some(ls) => {
                let rhs = ls
                    .grid()
                    .centers()
                    .iter()
                    .map(|p| free_space_green(p, source, self.k()))
                    .collect::<Result<Vec<_>>>()?;
                ls.solve(&rhs)?
            }
        };
        Ok(GreenColumn {
            source: *source,
            k: self.k(),
            volume: self.volume.clone(),
            nodal,
        })
    }

    pub fn green(&self, x: &Point3, y: &Point3) -> Result<Complex64> {
        match &self.volume {
            None => free_space_green(x, y, self.k()),
            Some(_) => self.column(y)?.value(x),
        }
    }

    /// A source at `y`, prepared for repeated evaluation of `G(x, y)` and,
    /// when `derivatives` is set, of its derivatives in `x` and `y`.
    pub fn point_source(&self, y: &Point3, derivatives: bool) -> Result<PointSource> {
        let center = self.column(y)?;
        let shifted = if derivatives && self.volume.is_some() {
            let h = self.fd_step;
            let mut cols = Vec::with_capacity(6);
            for b in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut p = *y;
                    p[b] += sign * h;
                    cols.push(self.column(&p)?);
                }
            }
            Some(cols)
        } else {
            None
        };
        Ok(PointSource {
            center,
            shifted,
            step: self.fd_step,
        })
    }

    pub fn jet(&self, x: &Point3, y: &Point3) -> Result<GreenJet> {
        self.point_source(y, true)?.jet(x)
    }

    /// `G(x, y) / g(x, y)`.
    pub fn far_field_ratio(&self, x: &Point3, y: &Point3) -> Result<FarFieldRatio> {
        let g = free_space_green(x, y, self.k())?;
        let near_domain = match self.medium.domain() {
            Some(d) if self.volume.is_some() => {
                let diam = d.diameter();
                d.distance_to(x) < diam || d.distance_to(y) < diam
            }
            _ => false,
        };
        Ok(FarFieldRatio {
            ratio: self.green(x, y)? / g,
            near_domain,
        })
    }

    /// `ikν(x, x_m) = ∇_y G(x, y)|_{y = x_m} / G(x, x_m)`.
    ///
    /// Closed form `(ik - 1/r)(x_m - x)/r` when `n ≡ 1`; otherwise central
    /// differences of `G(x, ·)`, using reciprocity `G(x, y) = G(y, x)` so that
    /// one solve (source at `x`) suffices.
    pub fn correction_vector(&self, x: &Point3, x_m: &Point3) -> Result<CVec3> {
        let (value, grad) = match &self.volume {
            None => {
                let jet = free_space_jet(x, x_m, self.k())?;
                (jet.value, jet.grad_y)
            }
            Some(_) => {
                let col = self.column(x)?;
                let h = self.fd_step;
                let mut grad = [ZERO; 3];
                for (b, gb) in grad.iter_mut().enumerate() {
                    let mut up = *x_m;
                    let mut down = *x_m;
                    up[b] += h;
                    down[b] -= h;
                    *gb = (col.value(&up)? - col.value(&down)?) / (2.0 * h);
                }
                (col.value(x_m)?, grad)
            }
        };
        if !(value.norm() > 1e-300) || !value.is_finite() {
            return Err(Error::Singular(format!(
                "G(x, x_m) = {value} vanishes; the correction vector is undefined"
            )));
        }
        Ok(grad.map(|g| g / value))
    }
}

/// The solved field `G(·, source)`.
pub struct GreenColumn {
    source: Point3,
    k: f64,
    volume: Option<Arc<LippmannSchwinger>>,
    nodal: Vec<Complex64>,
}

impl GreenColumn {
    pub fn source(&self) -> &Point3 {
        &self.source
    }

    /// Nodal values `G(ξ_j, source)` (empty for a homogeneous medium).
    pub fn nodal(&self) -> &[Complex64] {
        &self.nodal
    }

    pub fn value(&self, x: &Point3) -> Result<Complex64> {
        let free = free_space_green(x, &self.source, self.k)?;
        Ok(match &self.volume {
            None => free,
            Some(ls) => free + ls.scattered_at(x, &self.nodal),
        })
    }
}

/// A prepared source point: the center column plus, for the numerical Green
/// function, six columns at `y ± h e_b` for derivatives in `y`.
pub struct PointSource {
    center: GreenColumn,
    shifted: Option<Vec<GreenColumn>>,
    step: f64,
}

impl PointSource {
    pub fn position(&self) -> &Point3 {
        &self.center.source
    }

    pub fn value(&self, x: &Point3) -> Result<Complex64> {
        self.center.value(x)
    }

    pub fn jet(&self, x: &Point3) -> Result<GreenJet> {
        if self.center.volume.is_none() {
            return free_space_jet(x, &self.center.source, self.center.k);
        }
        let shifted = self.shifted.as_ref().ok_or_else(|| {
            Error::InvalidInput("point source was prepared without derivative columns".into())
        })?;
        let h = self.step;
        let shift = |p: &Point3, a: usize, s: f64| {
            let mut q = *p;
            q[a] += s * h;
            q
        };
        let value = self.center.value(x)?;
        let mut grad_x = [ZERO; 3];
        let mut grad_y = [ZERO; 3];
        let mut mixed = [[ZERO; 3]; 3];
        for a in 0..3 {
            grad_x[a] = (self.center.value(&shift(x, a, 1.0))? - self.center.value(&shift(x, a, -1.0))?)
                / (2.0 * h);
        }
        for b in 0..3 {
            let (up, down) = (&shifted[2 * b], &shifted[2 * b + 1]);
            grad_y[b] = (up.value(x)? - down.value(x)?) / (2.0 * h);
            for a in 0..3 {
                let xp = shift(x, a, 1.0);
                let xm = shift(x, a, -1.0);
                mixed[a][b] = (up.value(&xp)? - up.value(&xm)? - down.value(&xp)? + down.value(&xm)?)
                    / (4.0 * h * h);
            }
        }
        Ok(GreenJet {
            value,
            grad_x,
            grad_y,
            mixed,
        })
    }
}
