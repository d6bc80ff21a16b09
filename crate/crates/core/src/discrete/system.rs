use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::Scene;
use crate::greens::{free_space_jet, GreenJet, PointSource};
use crate::linalg::{norm_inf, DenseLu};
use crate::particle::{BoundaryCondition, Particle};
use crate::{CVec3, Error, Point3, Result, ZERO};

/// Green function access for particle sources: closed form in free space,
/// prepared numerical columns otherwise.
pub(crate) enum Coupling {
    Free(f64),
    Numeric(Vec<PointSource>),
}

impl Coupling {
    pub(crate) fn new(scene: &Scene, derivatives: bool) -> Result<Self> {
        let ev = scene.evaluator();
        if ev.is_homogeneous() {
            return Ok(Self::Free(ev.k()));
        }
        let sources = scene
            .particles()
            .par_iter()
            .map(|p| ev.point_source(p.center(), derivatives))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Numeric(sources))
    }

    /// Jet of `G(x, x_m)`; only `value` is filled when `full` is false.
    pub(crate) fn jet(&self, x: &Point3, m: usize, y: &Point3, full: bool) -> Result<GreenJet> {
        match self {
            Self::Free(k) => free_space_jet(x, y, *k),
            Self::Numeric(src) if full => src[m].jet(x),
            Self::Numeric(src) => Ok(GreenJet {
                value: src[m].value(x)?,
                grad_x: [ZERO; 3],
                grad_y: [ZERO; 3],
                mixed: [[ZERO; 3]; 3],
            }),
        }
    }
}

pub(crate) fn unknown_count(bc: BoundaryCondition) -> usize {
    match bc {
        BoundaryCondition::Dirichlet => 1,
        BoundaryCondition::Neumann => 4,
    }
}

/// Field of particle `m` at `x` per unit value of each of its unknowns:
/// `out[r][c]` with `r = 0` the field and `r = 1..=3` its `x`-gradient.
///
/// Dirichlet: the charge `Q` radiates `G Q`. Neumann: the unknowns
/// `(u_e, ∇u_e)` radiate `-k² n V G u_e - V ∂_{y_q}G β_qp ∂_p u_e`.
pub(crate) fn radiation(jet: &GreenJet, particle: &Particle, n_m: f64, k: f64) -> [[Complex64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    match particle.bc() {
        BoundaryCondition::Dirichlet => {
            out[0][0] = jet.value;
            for a in 0..3 {
                out[a + 1][0] = jet.grad_x[a];
            }
        }
        BoundaryCondition::Neumann => {
            let v = particle.volume();
            let beta = particle.polarizability();
            let mono = -k * k * n_m * v;
            out[0][0] = jet.value * mono;
            for a in 0..3 {
                out[a + 1][0] = jet.grad_x[a] * mono;
            }
            for p in 0..3 {
                let mut s = ZERO;
                for q in 0..3 {
                    s += jet.grad_y[q] * beta[(q, p)];
                }
                out[0][p + 1] = -v * s;
                for a in 0..3 {
                    let mut s = ZERO;
                    for q in 0..3 {
                        s += jet.mixed[a][q] * beta[(q, p)];
                    }
                    out[a + 1][p + 1] = -v * s;
                }
            }
        }
    }
    out
}

/// Dense linear system `A X = b` with identity diagonal blocks.
pub struct ScatteringSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: Vec<Complex64>,
    offsets: Vec<usize>,
    bcs: Vec<BoundaryCondition>,
}

impl ScatteringSystem {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// `‖A - I‖_∞`; for Dirichlet particles `max_j C_j Σ_{m≠j} |G(x_j, x_m)|`.
    pub fn contraction_margin(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.matrix[(i, j)].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn residual(&self, x: &[Complex64]) -> f64 {
        let ax = &self.matrix * DVector::from_column_slice(x);
        let r: Vec<Complex64> = ax.iter().zip(&self.rhs).map(|(a, b)| a - b).collect();
        let scale = norm_inf(&self.rhs);
        if scale == 0.0 {
            norm_inf(&r)
        } else {
            norm_inf(&r) / scale
        }
    }

    fn solution(&self, unknowns: Vec<Complex64>, diagnostics: SolverDiagnostics) -> ChargeSolution {
        ChargeSolution {
            unknowns,
            offsets: self.offsets.clone(),
            bcs: self.bcs.clone(),
            diagnostics,
        }
    }
}

/// Block assembly for any mix of boundary conditions.
pub fn assemble_system(scene: &Scene) -> Result<ScatteringSystem> {
    let particles = scene.particles();
    let any_neumann = particles.iter().any(|p| p.bc() == BoundaryCondition::Neumann);
    let coupling = Coupling::new(scene, any_neumann)?;
    let k = scene.k();
    let medium = scene.evaluator().medium();
    let inc = scene.incident();

    let mut offsets = Vec::with_capacity(particles.len());
    let mut n = 0;
    for p in particles {
        offsets.push(n);
        n += unknown_count(p.bc());
    }
    let bcs: Vec<BoundaryCondition> = particles.iter().map(|p| p.bc()).collect();

    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    let mut blocks: Vec<(usize, &mut [Complex64])> = Vec::with_capacity(particles.len());
    let mut rest = matrix.as_mut_slice();
    for (m, p) in particles.iter().enumerate() {
        let (head, tail) = rest.split_at_mut(unknown_count(p.bc()) * n);
        blocks.push((m, head));
        rest = tail;
    }
    blocks.into_par_iter().try_for_each(|(m, block)| -> Result<()> {
        let pm = &particles[m];
        let n_m = medium.refraction_at(pm.center());
        let cols = unknown_count(pm.bc());
        for c in 0..cols {
            block[c * n + offsets[m] + c] = Complex64::new(1.0, 0.0);
        }
        for (j, pj) in particles.iter().enumerate() {
            if j == m {
                continue;
            }
            let full = pm.bc() == BoundaryCondition::Neumann || pj.bc() == BoundaryCondition::Neumann;
            let jet = coupling.jet(pj.center(), m, pm.center(), full)?;
            let rad = radiation(&jet, pm, n_m, k);
            for c in 0..cols {
                let col = &mut block[c * n..(c + 1) * n];
                match pj.bc() {
                    BoundaryCondition::Dirichlet => col[offsets[j]] = rad[0][c] * pj.capacitance(),
                    BoundaryCondition::Neumann => {
                        for r in 0..4 {
                            col[offsets[j] + r] = -rad[r][c];
                        }
                    }
                }
            }
        }
        Ok(())
    })?;

    let mut rhs = vec![ZERO; n];
    for (j, pj) in particles.iter().enumerate() {
        let u0 = inc.eval(pj.center());
        match pj.bc() {
            BoundaryCondition::Dirichlet => rhs[offsets[j]] = -pj.capacitance() * u0,
            BoundaryCondition::Neumann => {
                rhs[offsets[j]] = u0;
                let g = inc.gradient(pj.center());
                rhs[offsets[j] + 1..offsets[j] + 4].copy_from_slice(&g);
            }
        }
    }
    Ok(ScatteringSystem {
        matrix,
        rhs,
        offsets,
        bcs,
    })
}

/// `Q_j + C_j Σ_{m≠j} G(x_j, x_m) Q_m = -C_j U0(x_j)`.
pub fn assemble_dirichlet_system(scene: &Scene) -> Result<ScatteringSystem> {
    if !scene.all(BoundaryCondition::Dirichlet) {
        return Err(Error::BoundaryCondition("the charge system needs Dirichlet particles only".into()));
    }
    assemble_system(scene)
}

/// Unknowns `(u_e(x_m), ∇u_e(x_m))` per particle with `Δu_e = -k² n u_e`.
pub fn assemble_neumann_system(scene: &Scene) -> Result<ScatteringSystem> {
    if !scene.all(BoundaryCondition::Neumann) {
        return Err(Error::BoundaryCondition("the moment system needs Neumann particles only".into()));
    }
    assemble_system(scene)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contraction {
    pub satisfied: bool,
    pub margin: f64,
}

/// `max_j C_j Σ_{m≠j} |G(x_j, x_m)|` and whether it is below one.
pub fn check_contraction(scene: &Scene) -> Result<Contraction> {
    if !scene.all(BoundaryCondition::Dirichlet) {
        return Err(Error::BoundaryCondition("the contraction test applies to Dirichlet scenes".into()));
    }
    let coupling = Coupling::new(scene, false)?;
    let particles = scene.particles();
    let rows = (0..particles.len())
        .into_par_iter()
        .map(|j| {
            let mut s = 0.0;
            for (m, pm) in particles.iter().enumerate() {
                if m != j {
                    s += coupling.jet(particles[j].center(), m, pm.center(), false)?.value.norm();
                }
            }
            Ok(particles[j].capacitance() * s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let margin = rows.into_iter().fold(0.0, f64::max);
    Ok(Contraction {
        satisfied: margin < 1.0,
        margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// The fixed-point iteration did not reach the tolerance.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub method: SolveMethod,
    pub status: SolveStatus,
    pub iterations: usize,
    /// `‖A - I‖_∞`.
    pub contraction_margin: f64,
    /// `‖A X - b‖_∞ / ‖b‖_∞`.
    pub residual: f64,
    /// Largest `‖ΔX⁽ⁿ⁺¹⁾‖_∞ / ‖ΔX⁽ⁿ⁾‖_∞` observed above the rounding floor.
    pub empirical_ratio: Option<f64>,
    pub min_pivot: Option<f64>,
}

/// Charges (Dirichlet) and effective-field moments (Neumann) per particle.
#[derive(Debug, Clone)]
pub struct ChargeSolution {
    unknowns: Vec<Complex64>,
    offsets: Vec<usize>,
    bcs: Vec<BoundaryCondition>,
    pub diagnostics: SolverDiagnostics,
}

impl ChargeSolution {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn unknowns(&self) -> &[Complex64] {
        &self.unknowns
    }

    pub fn bc(&self, m: usize) -> BoundaryCondition {
        self.bcs[m]
    }

    /// The unknowns of particle `m` (one charge, or `u_e` and `∇u_e`).
    pub fn block(&self, m: usize) -> &[Complex64] {
        let start = self.offsets[m];
        &self.unknowns[start..start + unknown_count(self.bcs[m])]
    }

    pub fn charge(&self, m: usize) -> Option<Complex64> {
        (self.bcs[m] == BoundaryCondition::Dirichlet).then(|| self.unknowns[self.offsets[m]])
    }

    /// All charges, when every particle is Dirichlet.
    pub fn charges(&self) -> Option<Vec<Complex64>> {
        (0..self.len()).map(|m| self.charge(m)).collect()
    }

    /// `(u_e(x_m), ∇u_e(x_m))` of a Neumann particle.
    pub fn moments(&self, m: usize) -> Option<(Complex64, CVec3)> {
        (self.bcs[m] == BoundaryCondition::Neumann).then(|| {
            let b = self.block(m);
            (b[0], [b[1], b[2], b[3]])
        })
    }
}

pub fn solve_direct(system: &ScatteringSystem) -> Result<ChargeSolution> {
    let margin = system.contraction_margin();
    if system.is_empty() {
        return Ok(system.solution(Vec::new(), direct_diag(margin, 0.0, None)));
    }
    let lu = DenseLu::factor(system.matrix.clone())?;
    let x = lu.solve_slice(&system.rhs)?;
    let residual = system.residual(&x);
    Ok(system.solution(x, direct_diag(margin, residual, Some(lu.min_pivot()))))
}

fn direct_diag(margin: f64, residual: f64, min_pivot: Option<f64>) -> SolverDiagnostics {
    SolverDiagnostics {
        method: SolveMethod::Direct,
        status: SolveStatus::Converged,
        iterations: 1,
        contraction_margin: margin,
        residual,
        empirical_ratio: None,
        min_pivot,
    }
}

/// Rounding floor below which step ratios are not recorded.
const RATIO_FLOOR: f64 = 1e-12;

/// Fixed-point iteration `X⁽ⁿ⁺¹⁾ = b - (A - I) X⁽ⁿ⁾` from `X⁽⁰⁾ = b`,
/// stopping when `‖ΔX‖_∞ <= tol ‖X‖_∞`.
pub fn solve_iterative(system: &ScatteringSystem, max_iter: usize, tol: f64) -> Result<ChargeSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let margin = system.contraction_margin();
    let n = system.len();
    let b = DVector::from_column_slice(&system.rhs);
    let mut x = b.clone();
    let mut prev_step: Option<f64> = None;
    let mut ratio: Option<f64> = None;
    let mut status = SolveStatus::Diverged;
    let mut iterations = 0;
    let scale = norm_inf(&system.rhs);
    if n == 0 || scale == 0.0 {
        status = SolveStatus::Converged;
    }
    while status == SolveStatus::Diverged && iterations < max_iter {
        let next = &b - (&system.matrix * &x - &x);
        iterations += 1;
        let step = (&next - &x).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let size = next.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if let Some(p) = prev_step {
            if p > RATIO_FLOOR * size {
                let r = step / p;
                ratio = Some(ratio.map_or(r, |q: f64| q.max(r)));
            }
        }
        prev_step = Some(step);
        x = next;
        if !size.is_finite() {
            break;
        }
        if step <= tol * size {
            status = SolveStatus::Converged;
        }
    }
    let xs: Vec<Complex64> = x.iter().copied().collect();
    let residual = system.residual(&xs);
    if status == SolveStatus::Diverged {
        log::warn!(
            "fixed-point iteration stopped after {iterations} steps without convergence (margin {margin:.3})"
        );
    }
    Ok(system.solution(
        xs,
        SolverDiagnostics {
            method: SolveMethod::Iterative,
            status,
            iterations,
            contraction_margin: margin,
            residual,
            empirical_ratio: ratio,
            min_pivot: None,
        },
    ))
}
