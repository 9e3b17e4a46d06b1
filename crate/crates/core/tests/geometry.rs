use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::Matrix3;
use proptest::prelude::*;

use np3_core::catalog::{self, CatalogParams};
use np3_core::geometry::{geodesic_integrate, MetricChart, Vec3};
use np3_core::sampling::sample_points;
use np3_core::Error;

fn entry(id: &str) -> catalog::CatalogEntry {
    catalog::load(id, CatalogParams::default()).unwrap()
}

fn chart(id: &str) -> MetricChart {
    entry(id).chart
}

/// `K (g_jk g_il − g_ik g_jl)` restricted to the index set `active`.
fn space_form(g: &Matrix3<f64>, k: f64, active: &[usize]) -> [[[[f64; 3]; 3]; 3]; 3] {
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for &i in active {
        for &j in active {
            for &a in active {
                for &b in active {
                    r[i][j][a][b] = k * (g[(j, a)] * g[(i, b)] - g[(i, a)] * g[(j, b)]);
                }
            }
        }
    }
    r
}

fn max_diff(a: &[[[[f64; 3]; 3]; 3]; 3], b: &[[[[f64; 3]; 3]; 3]; 3]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    worst = worst.max((a[i][j][k][l] - b[i][j][k][l]).abs());
                }
            }
        }
    }
    worst
}

fn hopf_metric(u: &[f64; 3]) -> Matrix3<f64> {
    let (s, c) = u[0].sin_cos();
    Matrix3::from_diagonal(&Vec3::new(1.0, s * s, c * c))
}

#[test]
fn flat_metric_is_identity() {
    let m = chart("euclidean").metric_at(&[1.3, -0.4, 2.0]).unwrap();
    assert_eq!(m.g, Matrix3::identity());
    assert_eq!(m.sqrt_det, 1.0);
}

#[test]
fn half_space_metric_at_height_two() {
    let m = chart("h3").metric_at(&[0.2, -0.1, 2.0]).unwrap();
    assert_abs_diff_eq!(m.g, Matrix3::identity() / 4.0, epsilon = 1e-15);
    assert_abs_diff_eq!(m.sqrt_det, 0.125, epsilon = 1e-15);
}

#[test]
fn hopf_metric_matches_closed_form_and_inverse() {
    let c = chart("s3_round");
    for u in [[0.6, 0.0, 0.0], [0.3, 1.2, -2.0], [1.2, -0.5, 2.5]] {
        let m = c.metric_at(&u).unwrap();
        assert_abs_diff_eq!(m.g, hopf_metric(&u), epsilon = 1e-14);
        assert_abs_diff_eq!(m.g * m.g_inv, Matrix3::identity(), epsilon = 1e-12);
    }
}

#[test]
fn metric_errors() {
    let c = chart("h3");
    assert!(matches!(c.metric_at(&[0.0, 0.0, -1.0]), Err(Error::PointOutsideChart { .. })));
    // the margin shrinks the admissible box
    assert!(matches!(c.metric_at(&[0.0, 0.0, 0.055]), Err(Error::PointOutsideChart { .. })));
    let bad = MetricChart::new(
        "indefinite",
        [(-1.0, 1.0); 3],
        std::sync::Arc::new(|_| Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0))),
    );
    match bad.metric_at(&[0.0; 3]) {
        Err(Error::MetricNotPositiveDefinite { eigenvalue, .. }) => assert_abs_diff_eq!(eigenvalue, -1.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn flat_christoffels_vanish() {
    let g = chart("euclidean").christoffel(&[0.1, 0.2, 0.3]).unwrap();
    for k in 0..3 {
        assert_eq!(g.0[k], Matrix3::zeros());
    }
}

#[test]
fn half_space_christoffels_at_height_two() {
    let c = chart("h3");
    let u = [0.4, -0.3, 2.0];
    for ch in [c.christoffel(&u).unwrap(), c.without_partials().christoffel(&u).unwrap()] {
        assert_abs_diff_eq!(ch.get(2, 0, 0), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(ch.get(0, 0, 2), -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(ch.get(0, 2, 0), -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(ch.get(2, 2, 2), -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(ch.get(0, 1, 1), 0.0, epsilon = 1e-9);
    }
}

#[test]
fn analytic_and_differenced_partials_agree() {
    for e in catalog::all() {
        let reach = 0.05;
        let bounds = e.fields[0].sample_box;
        let fd = e.chart.without_partials();
        for u in sample_points(&e.chart, &bounds, 25, 7, reach).unwrap() {
            let a = e.chart.christoffel(&u).unwrap();
            let b = fd.christoffel(&u).unwrap();
            for k in 0..3 {
                let d = (a.0[k] - b.0[k]).abs().max();
                assert!(d < 1e-6, "{} at {u:?}: Γ^{k} differs by {d:e}", e.manifold_id);
            }
            let dg = e.chart.partials(&u).unwrap();
            let dg_fd = e.chart.partials_fd(&u).unwrap();
            for k in 0..3 {
                assert!((dg[k] - dg_fd[k]).abs().max() < 1e-8, "{}: ∂g mismatch", e.manifold_id);
            }
        }
    }
}

fn compatibility_residual(c: &MetricChart, u: &[f64; 3]) -> f64 {
    let g = c.metric_at(u).unwrap().g;
    let dg = c.partials(u).unwrap();
    let gam = c.christoffel(u).unwrap();
    let mut worst = 0.0f64;
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut r = dg[k][(i, j)];
                for l in 0..3 {
                    r -= gam.get(l, k, i) * g[(l, j)] + gam.get(l, k, j) * g[(i, l)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

#[test]
fn symmetries_and_compatibility_at_catalog_points() {
    for e in catalog::all() {
        for (c, tol) in [(e.chart.clone(), 1e-6), (e.chart.without_partials(), 1e-3)] {
            let pts = sample_points(&c, &e.fields[0].sample_box, 100, 11, 0.05).unwrap();
            for u in &pts {
                let curv = c.curvature(u).unwrap();
                let s = curv.riem.symmetry_residual();
                assert!(s < tol, "{} ({}): symmetry residual {s:e}", e.manifold_id, c.has_analytic_partials());
                assert!(compatibility_residual(&c, u) < tol);
                let ric = curv.ric;
                assert!((ric - ric.transpose()).abs().max() < tol);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn berger_curvature_symmetries(eta in 0.2f64..1.37, x1 in -3.0f64..3.0, x2 in -3.0f64..3.0, lambda in 0.3f64..1.8) {
        let e = catalog::load("berger", CatalogParams { r: None, lambda: Some(lambda) }).unwrap();
        let curv = e.chart.curvature(&[eta, x1, x2]).unwrap();
        prop_assert!(curv.riem.symmetry_residual() < 1e-6);
        // Milnor: S = 8 − 2λ² for structure constants (2/λ, 2/λ, 2λ)
        prop_assert!((curv.scalar - (8.0 - 2.0 * lambda * lambda)).abs() < 1e-7);
    }

    #[test]
    fn nil_curvature_is_left_invariant(x in -2.5f64..2.5, y in -2.5f64..2.5, z in -2.5f64..2.5) {
        let c = chart("nil");
        let curv = c.curvature(&[x, y, z]).unwrap();
        prop_assert!(curv.riem.symmetry_residual() < 1e-6);
        prop_assert!((curv.scalar + 0.5).abs() < 1e-8);
        // e3 = ∂z is unit with Ric(e3, e3) = ½
        prop_assert!((curv.ric[(2, 2)] - 0.5).abs() < 1e-8);
    }
}

#[test]
fn flat_curvature_vanishes() {
    let c = chart("euclidean");
    for u in sample_points(&c, &[(-3.0, 3.0); 3], 100, 3, 0.05).unwrap() {
        let curv = c.curvature(&u).unwrap();
        assert_eq!(curv.riem.max_abs(), 0.0);
        assert_eq!(curv.scalar, 0.0);
    }
}

#[test]
fn space_forms_match_closed_form_riemann() {
    let cases = [("s3_round", 1.0, vec![0, 1, 2]), ("h3", -1.0, vec![0, 1, 2]), ("h2xr", -1.0, vec![0, 1])];
    for (id, k, active) in cases {
        let e = entry(id);
        for u in sample_points(&e.chart, &e.fields[0].sample_box, 50, 5, 0.05).unwrap() {
            let curv = e.chart.curvature(&u).unwrap();
            let g = e.chart.metric_at(&u).unwrap().g;
            let d = max_diff(&curv.riem.0, &space_form(&g, k, &active));
            assert!(d < 1e-8, "{id} at {u:?}: Riemann off by {d:e}");
        }
    }
}

#[test]
fn sphere_and_hyperbolic_ricci() {
    let s3 = chart("s3_round");
    for u in [[0.6, 0.0, 0.0], [0.25, 2.0, -1.0], [1.3, -2.9, 0.4]] {
        let curv = s3.curvature(&u).unwrap();
        let g = s3.metric_at(&u).unwrap().g;
        assert!((curv.ric - 2.0 * g).abs().max() < 1e-8);
        assert_abs_diff_eq!(curv.scalar, 6.0, epsilon = 1e-8);
    }
    let h3 = chart("h3");
    for u in [[0.0, 0.0, 1.0], [0.7, -0.2, 3.1], [-0.9, 0.4, 0.6]] {
        let curv = h3.curvature(&u).unwrap();
        let g = h3.metric_at(&u).unwrap().g;
        assert!((curv.ric + 2.0 * g).abs().max() < 1e-8);
        assert_abs_diff_eq!(curv.scalar, -6.0, epsilon = 1e-8);
    }
}

#[test]
fn sphere_radius_scales_curvature() {
    let e = catalog::load("s3_round", CatalogParams { r: Some(2.0), lambda: None }).unwrap();
    let curv = e.chart.curvature(&[0.7, 0.1, 0.2]).unwrap();
    assert_abs_diff_eq!(curv.scalar, 1.5, epsilon = 1e-8);
}

#[test]
fn covariant_derivative_examples() {
    let flat = chart("euclidean");
    let w = Vec3::new(0.3, -1.2, 0.5);
    let parallel = flat.covariant_derivative(&[0.1, 0.2, 0.3], |_| Ok(Vec3::z()), &w, 1e-4).unwrap();
    assert_eq!(parallel, Vec3::zeros());

    let radial = |u: &[f64; 3]| Ok(Vec3::new(u[0], u[1], u[2]).normalize());
    let tangent = Vec3::new(0.0, 1.0, 0.0);
    let d = flat.covariant_derivative(&[2.0, 0.0, 0.0], radial, &tangent, 1e-4).unwrap();
    assert_abs_diff_eq!(d, tangent / 2.0, epsilon = 1e-10);

    let s3 = chart("s3_round");
    let hopf = |_: &[f64; 3]| Ok(Vec3::new(0.0, 1.0, 1.0));
    let k = Vec3::new(0.0, 1.0, 1.0);
    let d = s3.covariant_derivative(&[0.6, 0.3, -0.2], hopf, &k, 1e-4).unwrap();
    assert!(d.norm() < 1e-12);
}

#[test]
fn covariant_derivative_is_linear_in_direction() {
    let c = chart("h3");
    let field = |u: &[f64; 3]| Ok(Vec3::new(u[1], u[2] * u[0], 1.0 + u[0]));
    let u = [0.2, 0.3, 1.7];
    let (a, b) = (Vec3::new(1.0, 0.5, -0.2), Vec3::new(-0.3, 0.9, 0.4));
    let lhs = c.covariant_derivative(&u, field, &(2.0 * a + b), 1e-4).unwrap();
    let rhs = 2.0 * c.covariant_derivative(&u, field, &a, 1e-4).unwrap()
        + c.covariant_derivative(&u, field, &b, 1e-4).unwrap();
    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
}

#[test]
fn straight_line_in_flat_space() {
    let trace = geodesic_integrate(&chart("euclidean"), &[0.0; 3], &Vec3::z(), 1.0, 1e-3).unwrap();
    assert_eq!(trace.len(), 1001);
    let end = trace.last().unwrap();
    assert_abs_diff_eq!(end.t, 1.0, epsilon = 1e-12);
    for (a, b) in end.u.iter().zip([0.0, 0.0, 1.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
    }
}

#[test]
fn hopf_fibre_closes_after_two_pi() {
    let c = chart("s3_round");
    let p0 = [0.6, 0.0, 0.0];
    let trace = geodesic_integrate(&c, &p0, &Vec3::new(0.0, 1.0, 1.0), 2.0 * PI, 1e-3).unwrap();
    let end = trace.last().unwrap();
    assert_abs_diff_eq!(end.t, 2.0 * PI, epsilon = 1e-12);
    // ξ1 and ξ2 are angles; the fibre closes modulo 2π
    let wrap = |a: f64| (a + PI).rem_euclid(2.0 * PI) - PI;
    assert!((end.u[0] - p0[0]).abs() < 1e-5);
    assert!(wrap(end.u[1] - p0[1]).abs() < 1e-5);
    assert!(wrap(end.u[2] - p0[2]).abs() < 1e-5);
}

#[test]
fn hyperbolic_geodesics_keep_unit_speed() {
    let c = chart("h3");
    let p0 = [0.1, -0.2, 1.5];
    let v = Vec3::new(0.3, 0.8, -0.4);
    let m = c.metric_at(&p0).unwrap();
    let v0 = v / m.norm(&v);
    let trace = geodesic_integrate(&c, &p0, &v0, 1.0, 1e-3).unwrap();
    for s in &trace {
        let speed = c.metric_at(&s.u).unwrap().norm(&Vec3::from(s.v));
        assert!((speed - 1.0).abs() < 1e-8, "speed {speed} at t = {}", s.t);
    }
}

#[test]
fn geodesic_errors() {
    let c = chart("euclidean");
    assert_eq!(
        geodesic_integrate(&c, &[0.0; 3], &Vec3::z(), 1.0, 0.0).unwrap_err(),
        Error::StepNotPositive(0.0)
    );
    assert!(matches!(
        geodesic_integrate(&c, &[0.0; 3], &(2.0 * Vec3::z()), 1.0, 1e-3),
        Err(Error::NotUnitVelocity(_))
    ));
    match geodesic_integrate(&c, &[0.0, 0.0, 3.0], &Vec3::z(), 2.0, 1e-2) {
        Err(Error::LeftChartDomain { t_exit }) => assert!(t_exit > 0.9 && t_exit < 1.0, "t_exit {t_exit}"),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(geodesic_integrate(&c, &[0.0; 3], &Vec3::z(), 0.0, 1e-3).unwrap().len(), 1);
}
