use std::f64::consts::PI;
use std::sync::Arc;

use manyscat::discrete::{
    assemble_dirichlet_system, assemble_neumann_system, assemble_system, check_contraction, eval_field,
    eval_field_dirichlet, eval_field_neumann, far_field_amplitude, optical_theorem_residual, solve_direct,
    solve_iterative, FieldFlag, Scene, SolveStatus,
};
use manyscat::greens::{free_space_green, BackgroundMedium, GreensEvaluator, GridSpec, IncidentField, RefractionProfile};
use manyscat::particle::{BoundaryCondition, Particle};
use manyscat::{Complex64, Error, Point3};

const Z: Point3 = Point3::new(0.0, 0.0, 1.0);

fn soft(center: Point3, a: f64) -> Particle {
    Particle::sphere(center, a, BoundaryCondition::Dirichlet).unwrap()
}

fn hard(center: Point3, a: f64) -> Particle {
    Particle::sphere(center, a, BoundaryCondition::Neumann).unwrap()
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn single_particle_charge_is_minus_c_u0() {
    let x1 = Point3::new(0.3, -0.2, 0.7);
    let scene = Scene::homogeneous(1.0, Z, vec![soft(x1, 0.02)]).unwrap();
    let sol = solve_direct(&assemble_dirichlet_system(&scene).unwrap()).unwrap();
    let expect = -scene.particles()[0].capacitance() * scene.incident().eval(&x1);
    assert!((sol.charge(0).unwrap() - expect).norm() < 1e-15);
    let contraction = check_contraction(&scene).unwrap();
    assert!(contraction.satisfied && contraction.margin == 0.0);
    let it = solve_iterative(&assemble_system(&scene).unwrap(), 10, 1e-12).unwrap();
    assert_eq!(it.diagnostics.status, SolveStatus::Converged);
    assert_eq!(it.diagnostics.iterations, 1);
}

#[test]
fn symmetric_pair_has_equal_charges() {
    let scene = Scene::homogeneous(
        1.0,
        Z,
        vec![soft(Point3::new(-0.5, 0.0, 0.0), 0.05), soft(Point3::new(0.5, 0.0, 0.0), 0.05)],
    )
    .unwrap();
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    let (q1, q2) = (sol.charge(0).unwrap(), sol.charge(1).unwrap());
    assert!((q1 - q2).norm() <= 4.0 * f64::EPSILON * q1.norm());
}

#[test]
fn two_particle_system_matches_hand_inversion() {
    let (x1, x2) = (Point3::new(0.0, 0.0, 0.0), Point3::new(0.4, 0.3, 0.0));
    let (a1, a2) = (0.03, 0.05);
    let k = 1.7;
    let scene = Scene::homogeneous(k, Point3::new(1.0, 1.0, 0.0), vec![soft(x1, a1), soft(x2, a2)]).unwrap();
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    // Q_j = -C_j (U0(x_j) + G Q_other)
    let (c1, c2) = (4.0 * PI * a1, 4.0 * PI * a2);
    let g = free_space_green(&x1, &x2, k).unwrap();
    let (u1, u2) = (scene.incident().eval(&x1), scene.incident().eval(&x2));
    let det = Complex64::new(1.0, 0.0) - c1 * c2 * g * g;
    let q1 = (-c1 * u1 + c1 * c2 * g * u2) / det;
    let q2 = (-c2 * u2 + c1 * c2 * g * u1) / det;
    assert!((sol.charge(0).unwrap() - q1).norm() < 1e-12 * q1.norm());
    assert!((sol.charge(1).unwrap() - q2).norm() < 1e-12 * q2.norm());
}

fn cluster() -> Vec<Particle> {
    vec![
        soft(Point3::new(0.0, 0.0, 0.0), 0.02),
        soft(Point3::new(0.5, 0.1, 0.0), 0.03),
        soft(Point3::new(-0.2, 0.6, 0.3), 0.01),
        soft(Point3::new(0.1, -0.4, 0.8), 0.025),
    ]
}

#[test]
fn relabeling_permutes_charges() {
    let particles = cluster();
    let order = [2, 0, 3, 1];
    let permuted: Vec<Particle> = order.iter().map(|&i| particles[i].clone()).collect();
    let a = solve_direct(&assemble_system(&Scene::homogeneous(1.0, Z, particles).unwrap()).unwrap()).unwrap();
    let b = solve_direct(&assemble_system(&Scene::homogeneous(1.0, Z, permuted).unwrap()).unwrap()).unwrap();
    for (new, &old) in order.iter().enumerate() {
        let (qa, qb) = (a.charge(old).unwrap(), b.charge(new).unwrap());
        assert!((qa - qb).norm() < 1e-14 * qa.norm());
    }
}

#[test]
fn direct_and_iterative_agree_and_ratio_respects_margin() {
    let scene = Scene::homogeneous(1.0, Z, cluster()).unwrap();
    let system = assemble_system(&scene).unwrap();
    let margin = check_contraction(&scene).unwrap().margin;
    assert!((margin - system.contraction_margin()).abs() < 1e-14);
    let d = solve_direct(&system).unwrap();
    let i = solve_iterative(&system, 200, 1e-14).unwrap();
    for m in 0..scene.len() {
        let (a, b) = (d.charge(m).unwrap(), i.charge(m).unwrap());
        assert!((a - b).norm() < 1e-10 * a.norm());
    }
    assert!(i.diagnostics.empirical_ratio.unwrap() <= margin + 0.05);
    assert!(d.diagnostics.residual < 1e-14);
}

#[test]
fn margin_shrinks_with_particle_size() {
    let centers = [Point3::new(0.0, 0.0, 0.0), Point3::new(0.3, 0.0, 0.0), Point3::new(0.0, 0.4, 0.1)];
    let margins: Vec<f64> = [0.05, 0.02, 0.01, 0.005]
        .iter()
        .map(|&a| {
            let scene = Scene::homogeneous(1.0, Z, centers.iter().map(|c| soft(*c, a)).collect()).unwrap();
            check_contraction(&scene).unwrap().margin
        })
        .collect();
    assert!(margins.windows(2).all(|w| w[1] < w[0]), "{margins:?}");
}

#[test]
fn dense_cluster_breaks_contraction_and_iteration_reports_divergence() {
    let grid = GridSpec::cube(Point3::zeros(), 0.5, 3).unwrap();
    let particles: Vec<Particle> = grid.centers().into_iter().map(|c| soft(c, 0.12)).collect();
    let scene = Scene::homogeneous(1.0, Z, particles).unwrap();
    let contraction = check_contraction(&scene).unwrap();
    assert!(!contraction.satisfied && contraction.margin >= 1.0);
    let it = solve_iterative(&assemble_system(&scene).unwrap(), 50, 1e-12).unwrap();
    assert_eq!(it.diagnostics.status, SolveStatus::Diverged);
}

#[test]
fn empty_scene_and_zero_charges_leave_incident_field() {
    let points = [Point3::new(1.0, 2.0, 3.0), Point3::new(-0.5, 0.0, 0.1)];
    let empty = Scene::homogeneous(1.0, Z, Vec::new()).unwrap();
    let sol = solve_direct(&assemble_system(&empty).unwrap()).unwrap();
    let field = eval_field(&empty, &sol, &points, false).unwrap();
    assert_eq!(field.u, field.u0);
    assert!(far_field_amplitude(&empty, &sol, &[Z], false).unwrap()[0] == c64(0.0, 0.0));

    let silent = Scene::homogeneous(1.0, Z, cluster()).unwrap().with_incident_amplitude(c64(0.0, 0.0));
    let sol = solve_direct(&assemble_system(&silent).unwrap()).unwrap();
    assert!(sol.charges().unwrap().iter().all(|q| *q == c64(0.0, 0.0)));
    let field = eval_field_dirichlet(&silent, &sol, &points, false).unwrap();
    assert_eq!(field.u, field.u0);
}

#[test]
fn single_soft_sphere_far_field_is_minus_a() {
    let a = 1e-3;
    let scene = Scene::homogeneous(1.0, Z, vec![soft(Point3::zeros(), a)]).unwrap();
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    let dirs = [Z, Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 0.6, -0.8)];
    for f in far_field_amplitude(&scene, &sol, &dirs, false).unwrap() {
        assert!((f - c64(-a, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn neumann_single_particle_moments_are_incident_values() {
    let x1 = Point3::new(0.2, 0.1, -0.3);
    let scene = Scene::homogeneous(2.0, Point3::new(0.0, 1.0, 1.0), vec![hard(x1, 0.01)]).unwrap();
    let sol = solve_direct(&assemble_neumann_system(&scene).unwrap()).unwrap();
    let (u, grad) = sol.moments(0).unwrap();
    assert!((u - scene.incident().eval(&x1)).norm() < 1e-15);
    let g0 = scene.incident().gradient(&x1);
    for i in 0..3 {
        assert!((grad[i] - g0[i]).norm() < 1e-14);
    }
    assert!(sol.charge(0).is_none());
    assert!(assemble_dirichlet_system(&scene).is_err());
}

#[test]
fn amplitude_scaling_is_linear() {
    let scene = Scene::homogeneous(1.0, Z, cluster()).unwrap();
    let double = scene.with_incident_amplitude(c64(2.0, 0.0));
    let a = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    let b = solve_direct(&assemble_system(&double).unwrap()).unwrap();
    for m in 0..scene.len() {
        assert!((b.charge(m).unwrap() - a.charge(m).unwrap() * 2.0).norm() < 1e-15);
    }
    let x = [Point3::new(2.0, 1.0, 0.0)];
    let (fa, fb) = (eval_field(&scene, &a, &x, false).unwrap(), eval_field(&double, &b, &x, false).unwrap());
    assert!((fb.scattered()[0] - fa.scattered()[0] * 2.0).norm() < 1e-15);
}

#[test]
fn translation_multiplies_charges_by_incident_phase() {
    let t = Point3::new(0.7, -1.2, 2.5);
    let k = 1.3;
    let moved: Vec<Particle> = cluster().iter().map(|p| p.translated(&t)).collect();
    let a_scene = Scene::homogeneous(k, Z, cluster()).unwrap();
    let b_scene = Scene::homogeneous(k, Z, moved).unwrap();
    let a = solve_direct(&assemble_system(&a_scene).unwrap()).unwrap();
    let b = solve_direct(&assemble_system(&b_scene).unwrap()).unwrap();
    let phase = Complex64::from_polar(1.0, k * t.z);
    for m in 0..a_scene.len() {
        let (qa, qb) = (a.charge(m).unwrap(), b.charge(m).unwrap());
        assert!((qb - qa * phase).norm() < 1e-8 * qa.norm());
    }
    let dirs: Vec<Point3> = (0..7).map(|i| Point3::new((i as f64).sin(), 0.3, (i as f64).cos())).collect();
    let fa = far_field_amplitude(&a_scene, &a, &dirs, false).unwrap();
    let fb = far_field_amplitude(&b_scene, &b, &dirs, false).unwrap();
    for (x, y) in fa.iter().zip(&fb) {
        assert!((x.norm() - y.norm()).abs() < 1e-8 * x.norm());
    }
}

#[test]
fn optical_theorem_residual_is_reported() {
    let scene = Scene::homogeneous(1.0, Z, vec![soft(Point3::zeros(), 0.01)]).unwrap();
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    let ot = optical_theorem_residual(&scene, &sol, 16).unwrap();
    assert!(ot.residual.is_finite());
    assert!(ot.scattered_power > 0.0);
}

#[test]
fn field_flags_near_and_inside() {
    let scene = Scene::homogeneous(1.0, Z, vec![soft(Point3::zeros(), 0.1), hard(Point3::new(2.0, 0.0, 0.0), 0.1)])
        .unwrap();
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    assert_eq!(sol.bc(1), BoundaryCondition::Neumann);
    let points = [Point3::new(0.0, 0.0, 5.0), Point3::new(0.2, 0.0, 0.0), Point3::new(0.05, 0.0, 0.0)];
    let field = eval_field(&scene, &sol, &points, true).unwrap();
    assert_eq!(field.flags, vec![FieldFlag::Valid, FieldFlag::NearField, FieldFlag::Inside]);
    assert!(eval_field_neumann(&scene, &sol, &points).is_err());
}

#[test]
fn overlapping_particles_are_rejected() {
    let err = Scene::homogeneous(1.0, Z, vec![soft(Point3::zeros(), 0.1), soft(Point3::new(0.15, 0.0, 0.0), 0.1)])
        .err()
        .unwrap();
    assert!(matches!(err, Error::Overlap { first: 0, second: 1, .. }));
    let same = Scene::homogeneous(1.0, Z, vec![soft(Point3::zeros(), 0.1), soft(Point3::zeros(), 0.1)]);
    assert!(same.is_err());
}

#[test]
fn inhomogeneous_background_single_particle() {
    let grid = GridSpec::cube(Point3::new(0.0, 0.0, -1.0), 0.5, 6).unwrap();
    let profile = RefractionProfile::constant(grid, 1.2).unwrap();
    let ev = Arc::new(GreensEvaluator::build(BackgroundMedium::new(1.0, Some(profile)).unwrap(), 1).unwrap());
    let inc = IncidentField::plane_wave(&ev, Z).unwrap();
    let x1 = Point3::new(0.0, 0.0, 1.0);
    let scene = Scene::new(ev, inc.clone(), vec![soft(x1, 0.01)]).unwrap();
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    let expect = -scene.particles()[0].capacitance() * inc.eval(&x1);
    assert!((sol.charge(0).unwrap() - expect).norm() < 1e-14);
    // the scattered field is Q G(x, x1)
    let x = Point3::new(0.5, 0.3, 2.0);
    let field = eval_field(&scene, &sol, &[x], false).unwrap();
    let g = scene.evaluator().green(&x, &x1).unwrap();
    assert!((field.scattered()[0] - expect * g).norm() < 1e-12);
    assert!((scene.diagnostics().ka - 0.01).abs() < 1e-15);
}
