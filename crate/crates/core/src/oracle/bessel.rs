//! Spherical Bessel functions of real argument.
//!
//! `j_l` by Miller's downward recurrence normalized to `j_0 = sin x / x`,
//! `y_l` by upward recurrence (stable for the second kind).

use num_complex::Complex64;

/// `j_0 .. j_{l_max}` at `x > 0`.
pub fn spherical_j(l_max: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "spherical_j needs x > 0");
    let start = l_max + 20 + x.ceil() as usize + 4 * (2.0 * x).sqrt().ceil() as usize;
    let mut f = vec![0.0f64; start + 2];
    f[start] = 1e-300;
    for l in (1..=start).rev() {
        f[l - 1] = (2 * l + 1) as f64 / x * f[l] - f[l + 1];
        if f[l - 1].abs() > 1e250 {
            for v in f.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut out = f[..=l_max].to_vec();
    let j0 = if x < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    };
    let scale = j0 / out[0];
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// `y_0 .. y_{l_max}` at `x > 0`.
pub fn spherical_y(l_max: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "spherical_y needs x > 0");
    let mut out = vec![0.0; l_max + 1];
    out[0] = -x.cos() / x;
    if l_max >= 1 {
        out[1] = -x.cos() / (x * x) - x.sin() / x;
    }
    for l in 1..l_max {
        out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
    }
    out
}

/// `h_l^{(1)} = j_l + i y_l`.
pub fn spherical_h1(l_max: usize, x: f64) -> Vec<Complex64> {
    spherical_j(l_max, x)
        .into_iter()
        .zip(spherical_y(l_max, x))
        .map(|(j, y)| Complex64::new(j, y))
        .collect()
}

/// Derivatives from `f_l' = f_{l-1} - (l + 1) f_l / x`, `f_0' = -f_1`.
/// `values` must hold orders `0..=l_max + 1`.
pub fn derivatives<T>(values: &[T], x: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Neg<Output = T>,
{
    let l_max = values.len() - 2;
    (0..=l_max)
        .map(|l| {
            if l == 0 {
                -values[1]
            } else {
                values[l - 1] - values[l] * ((l + 1) as f64 / x)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    // closed forms for low orders
    fn j_closed(l: usize, x: f64) -> f64 {
        let (s, c) = (x.sin(), x.cos());
        match l {
            0 => s / x,
            1 => s / (x * x) - c / x,
            2 => (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
            3 => (15.0 / x.powi(3) - 6.0 / x) * s / x - (15.0 / (x * x) - 1.0) * c / x,
            _ => unreachable!(),
        }
    }

    #[test]
    fn low_orders_match_closed_forms() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 15.0] {
            let j = spherical_j(3, x);
            for l in 0..=3 {
                assert!((j[l] - j_closed(l, x)).abs() < 1e-12, "l={l} x={x}");
            }
        }
    }

    #[test]
    fn small_argument_power_law() {
        // j_l(x) ~ x^l / (2l+1)!!
        let x = 1e-3;
        let j = spherical_j(6, x);
        let mut dfact = 1.0;
        for l in 0..=6 {
            dfact *= (2 * l + 1) as f64;
            let expect = x.powi(l as i32) / dfact;
            assert!((j[l] / expect - 1.0).abs() < 1e-5, "l={l}");
        }
    }

    #[test]
    fn wronskian_identity() {
        // j_l y_{l-1} - j_{l-1} y_l = 1/x²
        for &x in &[0.05, 0.7, 3.0, 12.0] {
            let (j, y) = (spherical_j(10, x), spherical_y(10, x));
            for l in 1..=10 {
                let w = j[l] * y[l - 1] - j[l - 1] * y[l];
                assert!((w * x * x - 1.0).abs() < 1e-9, "x={x} l={l}");
            }
        }
    }

    #[test]
    fn derivative_recurrence_matches_finite_difference() {
        let x = 1.3;
        let d = derivatives(&spherical_j(5, x), x);
        let h = 1e-6;
        let (p, m) = (spherical_j(5, x + h), spherical_j(5, x - h));
        for l in 0..=4 {
            assert!((d[l] - (p[l] - m[l]) / (2.0 * h)).abs() < 1e-8);
        }
    }
}
