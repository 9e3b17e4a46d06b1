use approx::assert_abs_diff_eq;

use np3_core::catalog::{self, check_expected, evaluate, load_metric_file, CatalogParams, Quantity, MANIFOLD_IDS};
use np3_core::flow::Kinematics;
use np3_core::sampling::{sample_points, DEFAULT_SEED};
use np3_core::triad::{spin_coefficients, NumericConfig};
use np3_core::Error;

fn params(r: Option<f64>, lambda: Option<f64>) -> CatalogParams {
    CatalogParams { r, lambda }
}

#[test]
fn six_entries_with_named_fields() {
    let all = catalog::all();
    assert_eq!(all.len(), 6);
    let ids: Vec<_> = all.iter().map(|e| e.manifold_id.as_str()).collect();
    assert_eq!(ids, MANIFOLD_IDS);
    let s3 = catalog::load("s3_round", CatalogParams::default()).unwrap();
    assert!(s3.field_ids().contains(&"hopf"));
    for e in &all {
        assert!(!e.fields.is_empty());
        assert!(e.chart.has_analytic_partials());
        for row in &e.expected {
            assert!(!row.oracle.is_empty());
            if let Some(f) = &row.field_id {
                assert!(e.field(f).is_ok(), "{}: row for unknown field {f}", e.manifold_id);
            }
        }
    }
}

#[test]
fn every_expected_row_passes() {
    for e in catalog::all() {
        for row in check_expected(&e, 100, DEFAULT_SEED, NumericConfig::default()).unwrap() {
            assert!(
                row.pass,
                "{} {:?} {:?}: error {:e} > {:e}",
                e.manifold_id, row.field_id, row.quantity, row.max_error, row.tol
            );
        }
    }
}

#[test]
fn expected_rows_hold_for_other_parameters() {
    for (id, p) in [("s3_round", params(Some(0.5), None)), ("s3_round", params(Some(3.0), None)), ("berger", params(None, Some(0.4))), ("berger", params(None, Some(1.6)))] {
        let e = catalog::load(id, p).unwrap();
        for row in check_expected(&e, 20, 3, NumericConfig::default()).unwrap() {
            assert!(row.pass, "{id} {p:?} {:?}: {:e}", row.quantity, row.max_error);
        }
    }
}

/// Left-invariant oracle for the Berger sphere: an orthonormal frame with
/// `[f2,f3] = (2/λ) f1`, `[f3,f1] = (2/λ) f2`, `[f1,f2] = 2λ f3`.
fn milnor_ricci(l1: f64, l2: f64, l3: f64) -> [f64; 3] {
    let mu = 0.5 * (l1 + l2 + l3);
    [2.0 * (mu - l2) * (mu - l3), 2.0 * (mu - l3) * (mu - l1), 2.0 * (mu - l1) * (mu - l2)]
}

#[test]
fn berger_matches_milnor_frame_computation() {
    for lambda in [0.4, 0.7, 1.0, 1.5] {
        let e = catalog::load("berger", params(None, Some(lambda))).unwrap();
        let ric = milnor_ricci(2.0 / lambda, 2.0 / lambda, 2.0 * lambda);
        let u = [0.8, 0.3, -0.2];
        let k = &e.field("hopf").unwrap().spec;
        let kin = Kinematics::at(&e.chart, k, &u, NumericConfig::default()).unwrap();
        assert_abs_diff_eq!(kin.ric_kk, ric[2], epsilon = 1e-8);
        assert_abs_diff_eq!(kin.scalar, ric.iter().sum::<f64>(), epsilon = 1e-8);
        assert_abs_diff_eq!(kin.omega.abs(), 2.0 * lambda, epsilon = 1e-7);
    }
}

#[test]
fn nil_matches_heisenberg_frame_computation() {
    // [e1, e2] = e3: Ric = diag(−½, −½, ½), horizontal shear ½, vertical twist 1
    let ric = milnor_ricci(0.0, 0.0, 1.0);
    assert_eq!(ric, [-0.5, -0.5, 0.5]);
    let e = catalog::load("nil", CatalogParams::default()).unwrap();
    let cfg = NumericConfig::default();
    for u in sample_points(&e.chart, &[(-2.0, 2.0); 3], 20, 4, 0.01).unwrap() {
        let v = Kinematics::at(&e.chart, &e.field("vertical").unwrap().spec, &u, cfg).unwrap();
        assert_abs_diff_eq!(v.ric_kk, ric[2], epsilon = 1e-8);
        assert_abs_diff_eq!(v.omega.abs(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(v.scalar, -0.5, epsilon = 1e-8);
        let h = Kinematics::at(&e.chart, &e.field("horizontal").unwrap().spec, &u, cfg).unwrap();
        assert_abs_diff_eq!(h.ric_kk, ric[0], epsilon = 1e-8);
        assert_abs_diff_eq!(h.shear_mag2, 0.25, epsilon = 1e-8);
    }
}

#[test]
fn round_berger_agrees_with_round_sphere() {
    let b = catalog::load("berger", params(None, Some(1.0))).unwrap();
    let s = catalog::load("s3_round", params(Some(1.0), None)).unwrap();
    let cfg = NumericConfig::default();
    for field in ["hopf", "meridian"] {
        let fb = &b.field(field).unwrap().spec;
        let fs = &s.field(field).unwrap().spec;
        for u in sample_points(&s.chart, &s.field(field).unwrap().sample_box, 20, 8, 0.01).unwrap() {
            let (cb, cs) = (b.chart.curvature(&u).unwrap(), s.chart.curvature(&u).unwrap());
            assert_abs_diff_eq!(cb.scalar, cs.scalar, epsilon = 1e-8);
            assert!((cb.ric - cs.ric).abs().max() < 1e-8);
            let (sb, ss) = (spin_coefficients(&b.chart, fb, &u).unwrap(), spin_coefficients(&s.chart, fs, &u).unwrap());
            for (x, y) in sb.as_array().iter().zip(ss.as_array()) {
                assert!((x - y).norm() < 1e-8);
            }
            for q in [Quantity::SupRk, Quantity::KillingResidual, Quantity::Div] {
                let vb = evaluate(&b.chart, Some(fb), q, &u, cfg).unwrap();
                let vs = evaluate(&s.chart, Some(fs), q, &u, cfg).unwrap();
                assert_abs_diff_eq!(vb, vs, epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn load_errors() {
    assert_eq!(
        catalog::load("torus", CatalogParams::default()).unwrap_err(),
        Error::UnknownManifold("torus".into())
    );
    for p in [params(Some(0.0), None), params(Some(-1.0), None), params(Some(f64::NAN), None)] {
        assert!(matches!(catalog::load("s3_round", p), Err(Error::BadParameter(_))));
    }
    assert!(matches!(catalog::load("berger", params(None, Some(0.0))), Err(Error::BadParameter(_))));
    let e = catalog::load("h3", CatalogParams::default()).unwrap();
    assert!(matches!(e.field("hopf"), Err(Error::UnknownField { .. })));
    assert!(matches!(
        evaluate(&e.chart, None, Quantity::Div, &[0.0, 0.0, 1.0], NumericConfig::default()),
        Err(Error::BadParameter(_))
    ));
}

#[test]
fn params_serialize_with_nulls() {
    let e = catalog::load("berger", CatalogParams::default()).unwrap();
    let json = serde_json::to_value(e.params).unwrap();
    assert_eq!(json, serde_json::json!({ "r": null, "lambda": 0.7 }));
}

#[test]
fn metric_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("np3-catalog-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sphere.toml");
    std::fs::write(
        &path,
        r#"
id = "sphere"
[domain]
u1 = [0.0, 1.5707963267948966]
u2 = [-4.0, 4.0]
u3 = [-4.0, 4.0]
[metric]
g11 = "1"
g22 = "sin(u1)^2"
g33 = "cos(u1)^2"
[fields]
hopf = ["0", "1", "1"]
"#,
    )
    .unwrap();
    let e = load_metric_file(&path).unwrap();
    assert!(!e.chart.has_analytic_partials());
    let k = &e.field("hopf").unwrap().spec;
    let u = [0.7, 0.1, 0.2];
    let kin = Kinematics::at(&e.chart, k, &u, NumericConfig::default()).unwrap();
    assert_abs_diff_eq!(kin.scalar, 6.0, epsilon = 1e-4);
    assert_abs_diff_eq!(kin.omega.abs(), 2.0, epsilon = 1e-6);

    assert!(matches!(load_metric_file(&dir.join("missing.toml")), Err(Error::MetricFile(_))));
    std::fs::write(&path, "id = \"x\"\n[metric]\ng11 = \"1 +\"\n").unwrap();
    assert!(load_metric_file(&path).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
