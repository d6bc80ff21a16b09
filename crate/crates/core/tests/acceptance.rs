//! Acceptance criteria 1–10. Each test prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use manyscat::continuum::{schrodinger_residual, solve_dirichlet_limit, EffectivePotential, LatticeStudy, ScalarDensity};
use manyscat::discrete::{
    assemble_system, check_contraction, eval_field, eval_field_neumann, far_field_amplitude, solve_direct,
    solve_iterative, Scene, SolveStatus,
};
use manyscat::greens::{
    free_space_green, BackgroundMedium, GreensEvaluator, GridSpec, IncidentField, RefractionProfile,
};
use manyscat::oracle::{j_integral, sphere_exact_amplitude};
use manyscat::particle::bem::{capacitance_bem, double_layer_identity_residual, polarizability_bem};
use manyscat::particle::{BoundaryCondition, Particle, TriMesh};
use manyscat::scene_io::{fibonacci_sphere, load_scene};
use manyscat::{Complex64, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: u32, ok: bool, detail: String) {
    println!("criterion {criterion}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn angles() -> Vec<f64> {
    (0..19).map(|i| (10.0 * i as f64).to_radians()).collect()
}

/// Observation directions in the x–z plane for incidence along +z.
fn directions(thetas: &[f64]) -> Vec<Point3> {
    thetas.iter().map(|t| Point3::new(t.sin(), 0.0, t.cos())).collect()
}

fn single_sphere(a: f64, bc: BoundaryCondition) -> Scene {
    let p = Particle::sphere(Point3::zeros(), a, bc).unwrap();
    Scene::homogeneous(1.0, Point3::new(0.0, 0.0, 1.0), vec![p]).unwrap()
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn criterion_01_soft_sphere_far_field() {
    let start = Instant::now();
    let scene = single_sphere(0.01, BoundaryCondition::Dirichlet);
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    let thetas = angles();
    let f = far_field_amplitude(&scene, &sol, &directions(&thetas), false).unwrap();
    let mut worst: f64 = 0.0;
    for (t, fi) in thetas.iter().zip(&f) {
        let exact = sphere_exact_amplitude(0.01, BoundaryCondition::Dirichlet, *t).unwrap();
        worst = worst.max((fi - exact).norm() / exact.norm());
    }
    let moduli: Vec<f64> = f.iter().map(|z| z.norm()).collect();
    let (lo, hi) = moduli.iter().fold((f64::MAX, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
    let spread = (hi - lo) / hi;
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        1,
        worst < 0.02 && spread < 1e-6 && elapsed < 1.0,
        format!("max rel error {worst:.3e} < 2e-2, modulus spread {spread:.3e} < 1e-6, {elapsed:.3}s < 1s"),
    );
}

#[test]
fn criterion_02_hard_sphere_far_field() {
    let start = Instant::now();
    let scene = single_sphere(0.01, BoundaryCondition::Neumann);
    let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
    let thetas = angles();
    let r = 1e4;
    let points: Vec<Point3> = directions(&thetas).into_iter().map(|d| d * r).collect();
    let field = eval_field_neumann(&scene, &sol, &points).unwrap();
    let pattern: Vec<Complex64> = field
        .scattered()
        .iter()
        .map(|us| us * r * Complex64::from_polar(1.0, -r))
        .collect();
    let exact: Vec<Complex64> = thetas
        .iter()
        .map(|t| sphere_exact_amplitude(0.01, BoundaryCondition::Neumann, *t).unwrap())
        .collect();
    let peak = exact.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let worst = pattern
        .iter()
        .zip(&exact)
        .fold(0.0f64, |m, (p, e)| m.max((p - e).norm()))
        / peak;
    let (fwd, back) = (pattern[0].norm(), pattern[18].norm());
    let asym = (fwd - back).abs() / fwd.max(back);
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        2,
        worst < 0.05 && asym > 0.1 && elapsed < 5.0,
        format!(
            "max error {worst:.3e} of pattern peak < 5e-2, |f(0)| = {fwd:.4e} vs |f(pi)| = {back:.4e}, {elapsed:.3}s < 5s"
        ),
    );
}

#[test]
fn criterion_03_scaling_dichotomy() {
    let start = Instant::now();
    let radii = [0.002, 0.005, 0.01, 0.02];
    let points = fibonacci_sphere(&Point3::zeros(), 5.0, 64);
    let norms = |bc| -> Vec<f64> {
        radii
            .iter()
            .map(|&a| {
                let scene = single_sphere(a, bc);
                let sol = solve_direct(&assemble_system(&scene).unwrap()).unwrap();
                l2(&eval_field(&scene, &sol, &points, false).unwrap().scattered())
            })
            .collect()
    };
    let soft = loglog_slope(&radii, &norms(BoundaryCondition::Dirichlet));
    let hard = loglog_slope(&radii, &norms(BoundaryCondition::Neumann));
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        3,
        (soft - 1.0).abs() <= 0.05 && (hard - 3.0).abs() <= 0.1 && elapsed < 10.0,
        format!("Dirichlet slope {soft:.4} (1 ± 0.05), Neumann slope {hard:.4} (3 ± 0.1), {elapsed:.3}s < 10s"),
    );
}

#[test]
fn criterion_04_iteration_matches_direct() {
    let loaded = load_scene(&fixture("random_50.json")).unwrap();
    let start = Instant::now();
    let scene = &loaded.scene;
    let contraction = check_contraction(scene).unwrap();
    let system = assemble_system(scene).unwrap();
    let direct = solve_direct(&system).unwrap();
    let iter = solve_iterative(&system, 500, 1e-14).unwrap();
    let diff: Vec<Complex64> = direct.unknowns().iter().zip(iter.unknowns()).map(|(a, b)| a - b).collect();
    let rel = l2(&diff) / l2(direct.unknowns());
    let ratio = iter.diagnostics.empirical_ratio.unwrap_or(0.0);
    let margin = contraction.margin;
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        4,
        scene.len() == 50
            && margin < 0.5
            && iter.diagnostics.status == SolveStatus::Converged
            && rel < 1e-10
            && ratio <= margin + 0.05
            && elapsed < 2.0,
        format!(
            "M = {}, margin {margin:.4} < 0.5, relative difference {rel:.3e} < 1e-10, \
             empirical ratio {ratio:.4} <= {:.4}, {} iterations, {elapsed:.3}s < 2s",
            scene.len(),
            margin + 0.05,
            iter.diagnostics.iterations
        ),
    );
}

#[test]
fn criterion_05_bem_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cap_errors = Vec::new();
    let mut identity = Vec::new();
    let mut panels = 0;
    for freq in [2, 4, 6, 8, 10] {
        let mesh = TriMesh::icosphere(1.0, freq).unwrap();
        panels = mesh.panel_count();
        let c = capacitance_bem(&mesh).unwrap();
        cap_errors.push((c - 4.0 * PI).abs() / (4.0 * PI));
        if freq != 4 {
            let sigma: Vec<f64> = (0..panels).map(|_| rng.gen_range(0.0..1.0)).collect();
            identity.push(double_layer_identity_residual(&mesh, &sigma).unwrap());
        }
    }
    let cap_final = *cap_errors.last().unwrap();
    let cap_monotone = cap_errors.windows(2).all(|w| w[1] < w[0]);
    let id_monotone = identity.windows(2).all(|w| w[1] < w[0]);

    let mesh = TriMesh::icosphere(1.0, 8).unwrap();
    let beta = polarizability_bem(&mesh, &Point3::zeros()).unwrap();
    let mean = beta.trace() / 3.0;
    let mut aniso: f64 = 0.0;
    for p in 0..3 {
        for q in 0..3 {
            let target = if p == q { mean } else { 0.0 };
            aniso = aniso.max((beta[(p, q)] - target).abs() / mean.abs());
        }
    }
    verdict(
        5,
        panels >= 1900 && cap_final < 0.01 && cap_monotone && id_monotone && aniso < 0.01,
        format!(
            "capacitance error {cap_final:.3e} < 1e-2 at {panels} panels, monotone {cap_monotone} {}; \
             identity residuals {} decreasing {id_monotone}; polarizability mean {mean:.4}, \
             anisotropy {aniso:.2e} < 1e-2",
            sci(&cap_errors),
            sci(&identity)
        ),
    );
}

#[test]
fn criterion_06_discrete_to_continuum() {
    let start = Instant::now();
    let evaluator = Arc::new(GreensEvaluator::homogeneous(1.0).unwrap());
    let incident = IncidentField::plane_wave(&evaluator, Point3::new(0.0, 0.0, 1.0)).unwrap();
    let center = Point3::zeros();
    let study = LatticeStudy {
        evaluator,
        incident,
        domain: GridSpec::cube(center, 0.5, 32).unwrap(),
        total_capacitance: 2.0,
        observation: fibonacci_sphere(&center, 1.5, 200),
        direct_limit: 1000,
        tol: 1e-12,
    };
    let rows = study.run(&[4, 8, 16]).unwrap();
    let errors: Vec<f64> = rows.iter().map(|r| r.rel_l2_total).collect();
    let scattered: Vec<f64> = rows.iter().map(|r| r.rel_l2_scattered).collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let last = *errors.last().unwrap();
    let fractions_vanish = rows.windows(2).all(|w| w[1].volume_fraction < w[0].volume_fraction);
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        6,
        rows.last().unwrap().particles == 4096 && monotone && last < 0.05 && fractions_vanish && elapsed < 120.0,
        format!(
            "relative L2 {} decreasing {monotone}, {last:.3e} < 5e-2 at M = 4096 \
             (relative to scattered part {}), {elapsed:.1}s < 120s",
            sci(&errors),
            sci(&scattered)
        ),
    );
}

#[test]
fn criterion_07_schrodinger_consistency() {
    let medium = BackgroundMedium::homogeneous(1.0).unwrap();
    let ev = GreensEvaluator::build(medium.clone(), 1).unwrap();
    let incident = IncidentField::plane_wave(&ev, Point3::new(0.0, 0.0, 1.0)).unwrap();
    let bump = |p: &Point3| {
        let s = |t: f64| (PI * (t + 0.5)).sin().powi(4);
        2.0 * s(p.x) * s(p.y) * s(p.z)
    };
    let mut h = Vec::new();
    let mut res = Vec::new();
    for n in [6, 12, 24] {
        let grid = GridSpec::cube(Point3::zeros(), 0.5, n).unwrap();
        let density = ScalarDensity::from_fn(grid.clone(), bump).unwrap();
        let field = solve_dirichlet_limit(&medium, &incident, &density).unwrap();
        let potential = EffectivePotential::new(&medium, &density);
        let report = schrodinger_residual(&grid, &field.nodal_field().u, &medium, &potential).unwrap();
        h.push(grid.max_spacing());
        res.push(report.residual);
    }
    let slope = loglog_slope(&h, &res);
    verdict(
        7,
        (slope - 2.0).abs() <= 0.3,
        format!("residuals {} at h = {h:.4?}, slope {slope:.3} (2 ± 0.3)", sci(&res)),
    );
}

#[test]
fn criterion_08_j_integral_decay() {
    let (lo, hi) = (Point3::repeat(-0.5), Point3::repeat(0.5));
    let y = Point3::new(1.0, 0.0, 0.0);
    let dist: Vec<f64> = (0..6).map(|i| 3.0 * 10f64.powf(i as f64 / 5.0)).collect();
    let j: Vec<f64> = dist.iter().map(|s| j_integral(&(y + Point3::new(0.0, 0.0, *s)), &y, &lo, &hi)).collect();
    let scaled: Vec<f64> = j.iter().zip(&dist).map(|(a, b)| a * b).collect();
    let (min, max) = scaled.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let variation = (max - min) / max;
    let slope = loglog_slope(&dist, &j);
    verdict(
        8,
        variation < 0.2 && (slope + 1.0).abs() <= 0.1,
        format!(
            "J|x-y| in [{min:.4}, {max:.4}] over |x-y| in [{:.1}, {:.1}], variation {variation:.3} < 0.2, slope {slope:.4} (-1 ± 0.1)",
            dist[0],
            dist[5]
        ),
    );
}

fn bump_medium(order: usize) -> GreensEvaluator {
    let grid = GridSpec::cube(Point3::zeros(), 0.5, 8).unwrap();
    let profile = RefractionProfile::from_fn(grid, |p| {
        let s = |t: f64| (PI * (t + 0.5)).sin().powi(2);
        1.0 + 0.5 * s(p.x) * s(p.y) * s(p.z)
    })
    .unwrap();
    GreensEvaluator::build(BackgroundMedium::new(2.0, Some(profile)).unwrap(), order).unwrap()
}

#[test]
fn criterion_09_variable_index_green() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut exterior = || {
        let dir = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
        let scale = rng.gen_range(0.55..1.5) / dir.amax();
        dir * scale
    };
    let pairs: Vec<(Point3, Point3)> = (0..12).map(|_| (exterior(), exterior())).collect();
    let reciprocity = |ev: &GreensEvaluator| {
        pairs.iter().fold(0.0f64, |m, (x, y)| {
            let (a, b) = (ev.green(x, y).unwrap(), ev.green(y, x).unwrap());
            m.max((a - b).norm() / a.norm())
        })
    };
    let coarse = bump_medium(1);
    let fine = bump_medium(2);
    let (e1, e2) = (reciprocity(&coarse), reciprocity(&fine));
    let improving = e2 <= e1.max(1e-12);

    let unit = RefractionProfile::constant(GridSpec::cube(Point3::zeros(), 0.5, 8).unwrap(), 1.0).unwrap();
    let ev1 = GreensEvaluator::build(BackgroundMedium::new(2.0, Some(unit)).unwrap(), 1).unwrap();
    let reduction = pairs.iter().fold(0.0f64, |m, (x, y)| {
        let g = free_space_green(x, y, 2.0).unwrap();
        m.max((ev1.green(x, y).unwrap() - g).norm() / g.norm())
    });

    let e = Point3::new(1.0, 0.2, -0.1).normalize();
    let ratios: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|r| (coarse.far_field_ratio(&(e * *r), &(-e * *r)).unwrap().ratio - 1.0).norm())
        .collect();
    let trend = ratios.windows(2).all(|w| w[1] < w[0]);
    verdict(
        9,
        e1 < 1e-3 && improving && reduction == 0.0 && trend,
        format!(
            "reciprocity {e1:.2e} (order 1) -> {e2:.2e} (order 2), n = 1 deviation {reduction:.1e}, \
             |G/g - 1| {} at |x-y| = 8, 16, 32, 64",
            sci(&ratios)
        ),
    );
}

#[test]
fn criterion_10_determinism_across_threads() {
    let exe = env!("CARGO_BIN_EXE_manyscat");
    let dir = tempfile::tempdir().unwrap();
    let scene = fixture("random_50.json");
    let run = |threads: usize| {
        let out = dir.path().join(format!("field_{threads}.csv"));
        let charges = dir.path().join(format!("charges_{threads}.csv"));
        let status = Command::new(exe)
            .args(["--threads", &threads.to_string(), "solve-discrete"])
            .arg(&scene)
            .arg("-o")
            .arg(&out)
            .arg("--charges")
            .arg(&charges)
            .status()
            .unwrap();
        assert!(status.success());
        (std::fs::read(out).unwrap(), std::fs::read(charges).unwrap())
    };
    let one = run(1);
    let many = run(4);
    let rows = one.0.iter().filter(|&&b| b == b'\n').count();
    verdict(
        10,
        one == many && rows == 101,
        format!("field ({rows} lines) and charges CSVs byte-identical for 1 and 4 threads: {}", one == many),
    );
}
