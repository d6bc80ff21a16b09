use num_complex::Complex64;

use crate::continuum::ScalarDensity;
use crate::greens::{GreensEvaluator, IncidentField};
use crate::{Point3, Result};

/// Tensor Gauss points per cell axis.
const POINTS: usize = 3;

/// `-∫ G(x, y) C(y) U0(y) dy` for a piecewise-constant density, by tensor
/// Gauss quadrature on every cell (cells containing `x` are subdivided).
pub fn born_first_term(
    evaluator: &GreensEvaluator,
    incident: &IncidentField,
    density: &ScalarDensity,
    x: &Point3,
) -> Result<Complex64> {
    let grid = density.grid();
    let column = evaluator.column(x)?;
    let (nodes, weights) = super::gauss_legendre(POINTS);
    let h = grid.spacing();
    let mut total = Complex64::new(0.0, 0.0);
    for (cell, &c) in density.values().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let center = grid.center(cell);
        let half = Point3::new(h[0], h[1], h[2]) / 2.0;
        let holds_x = (0..3).all(|a| (x[a] - center[a]).abs() <= half[a]);
        let split = if holds_x { 8 } else { 1 };
        let sub = half / split as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for si in 0..split {
            for sj in 0..split {
                for sk in 0..split {
                    let sc = center - half
                        + Point3::new(
                            (2 * si + 1) as f64 * sub.x,
                            (2 * sj + 1) as f64 * sub.y,
                            (2 * sk + 1) as f64 * sub.z,
                        );
                    for (a, wa) in nodes.iter().zip(&weights) {
                        for (b, wb) in nodes.iter().zip(&weights) {
                            for (e, we) in nodes.iter().zip(&weights) {
                                let y = sc + Point3::new(a * sub.x, b * sub.y, e * sub.z);
                                if (y - x).norm() == 0.0 {
                                    continue;
                                }
                                let w = wa * wb * we * sub.x * sub.y * sub.z;
                                acc += column.value(&y)? * incident.eval(&y) * w;
                            }
                        }
                    }
                }
            }
        }
        total -= acc * c;
    }
    Ok(total)
}
