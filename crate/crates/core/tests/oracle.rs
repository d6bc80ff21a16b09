use std::f64::consts::PI;

use manyscat::continuum::ScalarDensity;
use manyscat::greens::{free_space_green, GreensEvaluator, GridSpec, IncidentField};
use manyscat::oracle::bessel::{spherical_h1, spherical_j, spherical_y};
use manyscat::oracle::{born_first_term, j_integral, sphere_exact_amplitude, PartialWaveSeries};
use manyscat::particle::BoundaryCondition;
use manyscat::{Complex64, Point3};

#[test]
fn bessel_cross_product() {
    for x in [0.01, 0.5, 3.0, 17.0] {
        let (j, y) = (spherical_j(12, x), spherical_y(12, x));
        for l in 1..=12 {
            let w = j[l] * y[l - 1] - j[l - 1] * y[l];
            assert!((w * x * x - 1.0).abs() < 1e-9, "x = {x}, l = {l}");
        }
        let h = spherical_h1(3, x);
        assert!((h[2] - Complex64::new(j[2], y[2])).norm() < 1e-14 * h[2].norm());
    }
}

#[test]
fn j_integral_far_and_near() {
    let (lo, hi) = (Point3::repeat(-0.5), Point3::repeat(0.5));
    let x = Point3::new(40.0, 0.0, 0.0);
    let y = Point3::new(0.0, -60.0, 0.0);
    let far = j_integral(&x, &y, &lo, &hi);
    assert!((far * 2400.0 - 1.0).abs() < 1e-3, "{far}");
    // finite at and larger near the diagonal
    let inside = Point3::new(0.1, -0.2, 0.05);
    let diag = j_integral(&inside, &inside, &lo, &hi);
    let off = j_integral(&inside, &Point3::new(3.0, 0.0, 0.0), &lo, &hi);
    assert!(diag.is_finite() && diag > off);
    let scaled = j_integral(&(inside * 2.0), &(inside * 2.0), &(lo * 2.0), &(hi * 2.0));
    assert!((scaled / diag - 2.0).abs() < 1e-4);
}

#[test]
fn born_term_is_linear_and_matches_point_limit() {
    let k = 1.5;
    let ev = GreensEvaluator::homogeneous(k).unwrap();
    let inc = IncidentField::plane_wave(&ev, Point3::new(0.0, 1.0, 0.0)).unwrap();
    let grid = GridSpec::cube(Point3::zeros(), 0.5, 5).unwrap();
    let x = Point3::new(2.0, 1.0, -0.5);
    let zero = born_first_term(&ev, &inc, &ScalarDensity::zeros(grid.clone()), &x).unwrap();
    assert_eq!(zero, Complex64::new(0.0, 0.0));
    let d1 = ScalarDensity::from_fn(grid.clone(), |p| 1.0 + p.x).unwrap();
    let b1 = born_first_term(&ev, &inc, &d1, &x).unwrap();
    let b3 = born_first_term(&ev, &inc, &d1.scaled(3.0).unwrap(), &x).unwrap();
    assert!((b3 - b1 * 3.0).norm() < 1e-14 * b3.norm());

    // a small cube of density behaves like a point source
    let tiny = GridSpec::cube(Point3::new(0.2, 0.1, 0.0), 1e-3, 1).unwrap();
    let d = ScalarDensity::from_fn(tiny.clone(), |_| 1.0).unwrap();
    let b = born_first_term(&ev, &inc, &d, &x).unwrap();
    let c = tiny.center(0);
    let point = -free_space_green(&x, &c, k).unwrap() * inc.eval(&c) * tiny.cell_volume();
    assert!((b - point).norm() < 1e-5 * point.norm());
}

#[test]
fn small_sphere_amplitudes() {
    for ka in [1e-3, 1e-2] {
        let f = sphere_exact_amplitude(ka, BoundaryCondition::Dirichlet, 1.0).unwrap();
        assert!((f.re / -ka - 1.0).abs() < 2.0 * ka, "ka = {ka}");
        assert!((f.im / ka.powi(2) - 1.0).abs() < 0.05, "ka = {ka}");
    }
    let f = sphere_exact_amplitude(1e-2, BoundaryCondition::Neumann, PI / 2.0).unwrap();
    assert!((f.re / 1e-6 + 1.0 / 3.0).abs() < 1e-3);
}

#[test]
fn explicit_truncation_agrees_with_auto() {
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let auto = PartialWaveSeries::auto(0.7, bc).unwrap();
        let wide = PartialWaveSeries::new(0.7, bc, auto.l_max() + 10).unwrap();
        assert_eq!(auto.bc(), bc);
        assert_eq!(auto.ka(), 0.7);
        for t in [0.0, 0.8, 2.0, PI] {
            assert!((auto.amplitude(t) - wide.amplitude(t)).norm() < 1e-12);
        }
    }
    assert!(PartialWaveSeries::new(5.0, BoundaryCondition::Neumann, 3).is_err());
}
