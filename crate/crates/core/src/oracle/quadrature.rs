use std::f64::consts::PI;

use crate::Point3;

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for l in 2..=n {
                let p2 = ((2 * l - 1) as f64 * x * p1 - (l - 1) as f64 * p0) / l as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const RULE: usize = 4;

fn gauss_box(f: &dyn Fn(&Point3) -> f64, lo: &Point3, hi: &Point3, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (nodes, weights) = rule;
    let c = (lo + hi) / 2.0;
    let h = (hi - lo) / 2.0;
    let mut acc = 0.0;
    for (a, wa) in nodes.iter().zip(weights) {
        for (b, wb) in nodes.iter().zip(weights) {
            for (e, we) in nodes.iter().zip(weights) {
                let p = Point3::new(c.x + a * h.x, c.y + b * h.y, c.z + e * h.z);
                acc += wa * wb * we * f(&p);
            }
        }
    }
    acc * h.x * h.y * h.z
}

fn children(lo: &Point3, hi: &Point3) -> impl Iterator<Item = (Point3, Point3)> {
    let mid = (lo + hi) / 2.0;
    let (lo, hi) = (*lo, *hi);
    (0..8usize).map(move |c| {
        let mut a = lo;
        let mut b = mid;
        for ax in 0..3 {
            if (c >> ax) & 1 == 1 {
                a[ax] = mid[ax];
                b[ax] = hi[ax];
            }
        }
        (a, b)
    })
}

fn adaptive(
    f: &dyn Fn(&Point3) -> f64,
    lo: &Point3,
    hi: &Point3,
    coarse: f64,
    abs_tol: f64,
    depth: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let parts: Vec<(Point3, Point3, f64)> = children(lo, hi)
        .map(|(a, b)| {
            let v = gauss_box(f, &a, &b, rule);
            (a, b, v)
        })
        .collect();
    let fine: f64 = parts.iter().map(|p| p.2).sum();
    if depth == 0 || (fine - coarse).abs() <= abs_tol {
        return fine;
    }
    parts
        .iter()
        .map(|(a, b, v)| adaptive(f, a, b, *v, abs_tol / 8.0_f64.sqrt(), depth - 1, rule))
        .sum()
}

/// Adaptive cubature of a real function over an axis-aligned box.
pub fn integrate_box(f: &dyn Fn(&Point3) -> f64, lo: &Point3, hi: &Point3, rel_tol: f64, max_depth: usize) -> f64 {
    let rule = gauss_legendre(RULE);
    // rough global scale from a 4³ composite pass
    let n = 4;
    let h = (hi - lo) / n as f64;
    let mut scale = 0.0;
    let mut pieces = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let a = lo + Point3::new(i as f64 * h.x, j as f64 * h.y, l as f64 * h.z);
                let b = a + h;
                let v = gauss_box(f, &a, &b, &rule);
                scale += v.abs();
                pieces.push((a, b, v));
            }
        }
    }
    let abs_tol = rel_tol * scale / (pieces.len() as f64).sqrt();
    pieces
        .iter()
        .map(|(a, b, v)| adaptive(f, a, b, *v, abs_tol, max_depth, &rule))
        .sum()
}

/// `J(x, y) = ∫_D dz / (|x - z| |z - y|)` over the box `D = [lo, hi]`.
///
/// Cells containing `x` or `y` are refined adaptively; the integrand is only
/// weakly singular there.
pub fn j_integral(x: &Point3, y: &Point3, lo: &Point3, hi: &Point3) -> f64 {
    let f = |z: &Point3| {
        let (a, b) = ((x - z).norm(), (z - y).norm());
        if a == 0.0 || b == 0.0 {
            0.0
        } else {
            1.0 / (a * b)
        }
    };
    integrate_box(&f, lo, hi, 1e-7, 10)
}
