use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix3;

use super::{CatalogEntry, CatalogParams, Expected, ExpectedValue, FieldEntry, Quantity};
use crate::geometry::{MetricChart, Vec3};
use crate::triad::VectorFieldSpec;

pub const DEFAULT_BERGER_LAMBDA: f64 = 0.7;

fn constant(v: f64) -> ExpectedValue {
    ExpectedValue::Constant(v)
}

fn closed(f: impl Fn(&[f64; 3]) -> f64 + Send + Sync + 'static) -> ExpectedValue {
    ExpectedValue::Closed(Arc::new(f))
}

fn expect(field: Option<&str>, quantity: Quantity, value: ExpectedValue, tol: f64, oracle: &'static str) -> Expected {
    Expected {
        field_id: field.map(str::to_string),
        quantity,
        value,
        tol,
        oracle,
    }
}

fn field(id: &str, f: impl Fn(&[f64; 3]) -> Vec3 + Send + Sync + 'static) -> VectorFieldSpec {
    VectorFieldSpec::new(id, Arc::new(f))
}

pub fn euclidean() -> CatalogEntry {
    let chart = MetricChart::new("euclidean/cartesian", [(-4.0, 4.0); 3], Arc::new(|_| Matrix3::identity()))
        .with_partials(Arc::new(|_| [Matrix3::zeros(); 3]));
    let radial_box = [(0.5, 2.0), (-1.0, 1.0), (-1.0, 1.0)];
    let r = |u: &[f64; 3]| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let fields = vec![
        FieldEntry {
            spec: field("constant", |_| Vec3::z()),
            description: "parallel field ∂z",
            sample_box: [(-2.0, 2.0); 3],
            flow_start: [0.3, 0.2, -1.0],
            flow_length: 2.0,
            geodesic: true,
        },
        FieldEntry {
            spec: field("radial_out", |u| Vec3::new(u[0], u[1], u[2])),
            description: "outward unit radial field ∂r",
            sample_box: radial_box,
            flow_start: [1.0, 0.0, 0.0],
            flow_length: 1.0,
            geodesic: true,
        },
        FieldEntry {
            spec: field("radial_in", |u| -Vec3::new(u[0], u[1], u[2])),
            description: "inward unit radial field −∂r",
            sample_box: radial_box,
            flow_start: [1.0, 0.0, 0.0],
            flow_length: 0.9,
            geodesic: true,
        },
    ];
    let flat_oracle = "constant metric: all Christoffel symbols vanish";
    let expected = vec![
        expect(None, Quantity::ScalarCurvature, constant(0.0), 1e-8, flat_oracle),
        expect(Some("constant"), Quantity::Div, constant(0.0), 1e-8, flat_oracle),
        expect(Some("constant"), Quantity::OmegaAbs, constant(0.0), 1e-8, flat_oracle),
        expect(Some("constant"), Quantity::KappaAbs, constant(0.0), 1e-8, flat_oracle),
        expect(Some("constant"), Quantity::KillingResidual, constant(0.0), 1e-8, flat_oracle),
        expect(Some("radial_out"), Quantity::Div, closed(move |u| 2.0 / r(u)), 1e-7, "screen map (1/r)·Id in polar coordinates"),
        expect(Some("radial_out"), Quantity::SigmaAbs, constant(0.0), 1e-7, "screen map (1/r)·Id is umbilic"),
        expect(Some("radial_out"), Quantity::OmegaAbs, constant(0.0), 1e-7, "gradient field of r"),
        expect(Some("radial_out"), Quantity::KappaAbs, constant(0.0), 1e-7, "rays through the origin are straight lines"),
        expect(Some("radial_out"), Quantity::KillingResidual, closed(move |u| 2.0 / r(u)), 1e-7, "twice the screen eigenvalue 1/r"),
        expect(Some("radial_in"), Quantity::Div, closed(move |u| -2.0 / r(u)), 1e-7, "screen map −(1/r)·Id"),
        expect(Some("radial_in"), Quantity::SigmaAbs, constant(0.0), 1e-7, "screen map −(1/r)·Id is umbilic"),
    ];
    CatalogEntry {
        manifold_id: "euclidean".into(),
        description: "flat R^3 in Cartesian coordinates".into(),
        params: CatalogParams::default(),
        chart,
        fields,
        expected,
        default_samples: 100,
    }
}

/// Hopf coordinates `(η, ξ1, ξ2)` on the sphere of radius `r` with the Hopf
/// fibres stretched by `λ`:
/// `g = r²[dη² + sin²η dξ1² + cos²η dξ2² + (λ² − 1)(sin²η dξ1 + cos²η dξ2)²]`.
fn hopf_chart(id: &str, r: f64, lambda: f64) -> MetricChart {
    let a = lambda * lambda - 1.0;
    let r2 = r * r;
    let g = move |u: &[f64; 3]| {
        let (s, c) = u[0].sin_cos();
        let (s2, c2) = (s * s, c * c);
        Matrix3::new(
            1.0, 0.0, 0.0,
            0.0, s2 + a * s2 * s2, a * s2 * c2,
            0.0, a * s2 * c2, c2 + a * c2 * c2,
        ) * r2
    };
    let dg = move |u: &[f64; 3]| {
        let (s, c) = u[0].sin_cos();
        let sc = s * c;
        let d11 = 2.0 * sc + a * 4.0 * s * s * sc;
        let d22 = -2.0 * sc - a * 4.0 * c * c * sc;
        let d12 = a * 2.0 * sc * (c * c - s * s);
        let deta = Matrix3::new(
            0.0, 0.0, 0.0,
            0.0, d11, d12,
            0.0, d12, d22,
        ) * r2;
        [deta, Matrix3::zeros(), Matrix3::zeros()]
    };
    MetricChart::new(id, [(0.0, PI / 2.0), (-40.0, 40.0), (-40.0, 40.0)], Arc::new(g))
        .with_partials(Arc::new(dg))
}

const HOPF_BOX: [(f64, f64); 3] = [(0.2, 1.37), (-3.0, 3.0), (-3.0, 3.0)];

fn hopf_fields(r: f64, lambda: f64) -> Vec<FieldEntry> {
    vec![
        FieldEntry {
            spec: field("hopf", move |_| Vec3::new(0.0, 1.0, 1.0) / (r * lambda)),
            description: "unit Hopf field tangent to the Hopf fibres",
            sample_box: HOPF_BOX,
            flow_start: [0.6, 0.0, 0.0],
            flow_length: 2.0 * PI,
            geodesic: true,
        },
        FieldEntry {
            spec: field("meridian", move |_| Vec3::new(1.0 / r, 0.0, 0.0)),
            description: "unit meridian field ∂η/r, orthogonal to the Clifford tori",
            sample_box: HOPF_BOX,
            flow_start: [0.3, 0.0, 0.0],
            flow_length: 1.0,
            geodesic: true,
        },
    ]
}

pub fn s3_round(r: f64) -> CatalogEntry {
    let chart = hopf_chart("s3_round/hopf", r, 1.0);
    let bi = "bi-invariant metric: ∇_X Y = ½[X,Y] on left-invariant fields";
    let expected = vec![
        expect(None, Quantity::ScalarCurvature, constant(6.0 / (r * r)), 1e-8, "constant sectional curvature 1/r²: S = 6/r²"),
        expect(Some("hopf"), Quantity::RicKK, constant(2.0 / (r * r)), 1e-8, "Ric = 2K g"),
        expect(Some("hopf"), Quantity::KappaAbs, constant(0.0), 1e-7, "Hopf fibres are great circles"),
        expect(Some("hopf"), Quantity::SigmaAbs, constant(0.0), 1e-7, bi),
        expect(Some("hopf"), Quantity::Div, constant(0.0), 1e-7, bi),
        expect(Some("hopf"), Quantity::OmegaAbs, constant(2.0 / r), 1e-6, bi),
        expect(Some("hopf"), Quantity::KillingResidual, constant(0.0), 1e-7, "Hopf field generates isometries"),
        expect(Some("hopf"), Quantity::SupRk, constant(2.0 / (r * r)), 1e-7, "constant curvature: |R(k,·,·,·)| = 2K"),
        expect(Some("meridian"), Quantity::Div, closed(move |u| 2.0 / (r * (2.0 * u[0]).tan())), 1e-7, "div ∂η = ∂η log(sin η cos η)"),
        expect(Some("meridian"), Quantity::SigmaAbs, closed(move |u| 1.0 / (r * (2.0 * u[0]).sin())), 1e-7, "screen eigenvalues cot η and −tan η"),
        expect(Some("meridian"), Quantity::OmegaAbs, constant(0.0), 1e-7, "gradient of η"),
    ];
    CatalogEntry {
        manifold_id: "s3_round".into(),
        description: format!("round 3-sphere of radius {r} in Hopf coordinates"),
        params: CatalogParams { r: Some(r), lambda: None },
        chart,
        fields: hopf_fields(r, 1.0),
        expected,
        default_samples: 100,
    }
}

pub fn berger(lambda: f64) -> CatalogEntry {
    let chart = hopf_chart("berger/hopf", 1.0, lambda);
    let l2 = lambda * lambda;
    let expected = vec![
        expect(None, Quantity::ScalarCurvature, constant(8.0 - 2.0 * l2), 1e-8, "Milnor unimodular formula with structure constants (2/λ, 2/λ, 2λ)"),
        expect(Some("hopf"), Quantity::RicKK, constant(2.0 * l2), 1e-8, "unit Killing field: Ric(k,k) = ω²/2"),
        expect(Some("hopf"), Quantity::OmegaAbs, constant(2.0 * lambda), 1e-6, "ω = ⟨k,[x,y]⟩ with horizontal bracket 2K, |K| = λ"),
        expect(Some("hopf"), Quantity::KappaAbs, constant(0.0), 1e-7, "unit Killing field is geodesic"),
        expect(Some("hopf"), Quantity::SigmaAbs, constant(0.0), 1e-7, "Killing field is shear free"),
        expect(Some("hopf"), Quantity::Div, constant(0.0), 1e-7, "Killing field is divergence free"),
        expect(Some("hopf"), Quantity::KillingResidual, constant(0.0), 1e-7, "metric independent of ξ1, ξ2"),
        expect(Some("meridian"), Quantity::Div, closed(|u| 2.0 / (2.0 * u[0]).tan()), 1e-7, "√det g = λ sin η cos η"),
        expect(Some("meridian"), Quantity::OmegaAbs, constant(0.0), 1e-7, "gradient of η"),
        expect(Some("meridian"), Quantity::KappaAbs, constant(0.0), 1e-7, "g_ηη = 1 and g_ηξ = 0"),
    ];
    CatalogEntry {
        manifold_id: "berger".into(),
        description: format!("Berger sphere with fibre stretch λ = {lambda}"),
        params: CatalogParams { r: None, lambda: Some(lambda) },
        chart,
        fields: hopf_fields(1.0, lambda),
        expected,
        default_samples: 100,
    }
}

/// Hyperbolic distance from the centre `(0, 0, 1)` in the half-space model.
pub fn h3_distance(u: &[f64; 3]) -> f64 {
    let d2 = u[0] * u[0] + u[1] * u[1] + (u[2] - 1.0) * (u[2] - 1.0);
    (1.0 + d2 / (2.0 * u[2])).acosh()
}

pub fn h3() -> CatalogEntry {
    let chart = MetricChart::new(
        "h3/half_space",
        [(-5.0, 5.0), (-5.0, 5.0), (0.05, 10.0)],
        Arc::new(|u| Matrix3::identity() / (u[2] * u[2])),
    )
    .with_partials(Arc::new(|u| {
        [Matrix3::zeros(), Matrix3::zeros(), Matrix3::identity() * (-2.0 / u[2].powi(3))]
    }));
    // k^i = w² ∂_i d, with cosh d = 1 + |u − c|²/(2w)
    let radial = |u: &[f64; 3]| {
        let w = u[2];
        let d2 = u[0] * u[0] + u[1] * u[1] + (w - 1.0) * (w - 1.0);
        let a = 1.0 + d2 / (2.0 * w);
        let grad = Vec3::new(u[0] / w, u[1] / w, (w - 1.0) / w - d2 / (2.0 * w * w));
        grad * (w * w / (a * a - 1.0).sqrt())
    };
    let fields = vec![
        FieldEntry {
            spec: field("radial", radial),
            description: "unit radial field from the centre (0,0,1)",
            sample_box: [(-1.0, 1.0), (-1.0, 1.0), (1.5, 4.0)],
            flow_start: [0.0, 0.0, 0.5f64.exp()],
            flow_length: 1.0,
            geodesic: true,
        },
        FieldEntry {
            spec: field("horospherical", |u| Vec3::new(0.0, 0.0, u[2])),
            description: "unit field w∂w normal to the horospheres w = const",
            sample_box: [(-2.0, 2.0), (-2.0, 2.0), (0.5, 4.0)],
            flow_start: [0.3, 0.2, 1.0],
            flow_length: 1.0,
            geodesic: true,
        },
    ];
    let expected = vec![
        expect(None, Quantity::ScalarCurvature, constant(-6.0), 1e-8, "constant sectional curvature −1"),
        expect(Some("radial"), Quantity::RicKK, constant(-2.0), 1e-8, "Ric = 2K g"),
        expect(Some("radial"), Quantity::Div, closed(|u| 2.0 / h3_distance(u).tanh()), 1e-7, "geodesic spheres: screen map coth(r)·Id"),
        expect(Some("radial"), Quantity::SigmaAbs, constant(0.0), 1e-7, "geodesic spheres are umbilic"),
        expect(Some("radial"), Quantity::OmegaAbs, constant(0.0), 1e-7, "gradient of the distance"),
        expect(Some("radial"), Quantity::KappaAbs, constant(0.0), 1e-7, "gradient of a distance function"),
        expect(Some("radial"), Quantity::KillingResidual, closed(|u| 2.0 / h3_distance(u).tanh()), 1e-7, "twice the screen eigenvalue coth r"),
        expect(Some("radial"), Quantity::SupRk, constant(2.0), 1e-7, "constant curvature: |R(k,·,·,·)| = 2|K|"),
        expect(Some("horospherical"), Quantity::Div, constant(-2.0), 1e-7, "div(w∂w) = w³ ∂w(w⁻³ w)"),
        expect(Some("horospherical"), Quantity::SigmaAbs, constant(0.0), 1e-7, "horospheres are umbilic"),
        expect(Some("horospherical"), Quantity::OmegaAbs, constant(0.0), 1e-7, "gradient of log w"),
    ];
    CatalogEntry {
        manifold_id: "h3".into(),
        description: "hyperbolic 3-space (K = −1), upper half-space model".into(),
        params: CatalogParams::default(),
        chart,
        fields,
        expected,
        default_samples: 100,
    }
}

pub fn h2xr() -> CatalogEntry {
    let chart = MetricChart::new(
        "h2xr/half_plane",
        [(-5.0, 5.0), (0.05, 10.0), (-10.0, 10.0)],
        Arc::new(|u| {
            let a = 1.0 / (u[1] * u[1]);
            Matrix3::from_diagonal(&Vec3::new(a, a, 1.0))
        }),
    )
    .with_partials(Arc::new(|u| {
        let d = -2.0 / u[1].powi(3);
        [Matrix3::zeros(), Matrix3::from_diagonal(&Vec3::new(d, d, 0.0)), Matrix3::zeros()]
    }));
    let fields = vec![FieldEntry {
        spec: field("vertical", |_| Vec3::z()),
        description: "parallel unit field ∂z along the R factor",
        sample_box: [(-2.0, 2.0), (0.5, 3.0), (-2.0, 2.0)],
        flow_start: [0.0, 1.0, -1.0],
        flow_length: 2.0,
        geodesic: true,
    }];
    let product = "product metric: Γ has no z components, so ∇∂z = 0";
    let expected = vec![
        expect(None, Quantity::ScalarCurvature, constant(-2.0), 1e-8, "H² factor with K = −1: S = 2K"),
        expect(Some("vertical"), Quantity::RicKK, constant(0.0), 1e-8, product),
        expect(Some("vertical"), Quantity::Div, constant(0.0), 1e-8, product),
        expect(Some("vertical"), Quantity::OmegaAbs, constant(0.0), 1e-8, product),
        expect(Some("vertical"), Quantity::SigmaAbs, constant(0.0), 1e-8, product),
        expect(Some("vertical"), Quantity::KappaAbs, constant(0.0), 1e-8, product),
        expect(Some("vertical"), Quantity::KillingResidual, constant(0.0), 1e-8, product),
        expect(Some("vertical"), Quantity::SupRk, constant(0.0), 1e-8, "R(∂z,·,·,·) = 0 on a product with a line"),
    ];
    CatalogEntry {
        manifold_id: "h2xr".into(),
        description: "product of the hyperbolic plane (K = −1) with a line".into(),
        params: CatalogParams::default(),
        chart,
        fields,
        expected,
        default_samples: 100,
    }
}

/// Heisenberg group with left-invariant metric `dx² + dy² + (dz − x dy)²`.
pub fn nil() -> CatalogEntry {
    let chart = MetricChart::new(
        "nil/heisenberg",
        [(-3.0, 3.0); 3],
        Arc::new(|u| {
            let x = u[0];
            Matrix3::new(
                1.0, 0.0, 0.0,
                0.0, 1.0 + x * x, -x,
                0.0, -x, 1.0,
            )
        }),
    )
    .with_partials(Arc::new(|u| {
        let x = u[0];
        let dx = Matrix3::new(
            0.0, 0.0, 0.0,
            0.0, 2.0 * x, -1.0,
            0.0, -1.0, 0.0,
        );
        [dx, Matrix3::zeros(), Matrix3::zeros()]
    }));
    let fields = vec![
        FieldEntry {
            spec: field("vertical", |_| Vec3::z()),
            description: "left-invariant unit field e3 = ∂z (centre direction)",
            sample_box: [(-2.0, 2.0); 3],
            flow_start: [0.5, 0.5, -1.0],
            flow_length: 1.5,
            geodesic: true,
        },
        FieldEntry {
            spec: field("horizontal", |_| Vec3::x()),
            description: "left-invariant unit field e1 = ∂x",
            sample_box: [(-2.0, 2.0); 3],
            flow_start: [-1.0, 0.3, 0.0],
            flow_length: 2.0,
            geodesic: true,
        },
    ];
    let milnor = "left-invariant frame e1 = ∂x, e2 = ∂y + x∂z, e3 = ∂z with [e1,e2] = e3";
    let expected = vec![
        expect(None, Quantity::ScalarCurvature, constant(-0.5), 1e-8, milnor),
        expect(Some("vertical"), Quantity::OmegaAbs, constant(1.0), 1e-6, "ω = ±⟨e3,[e1,e2]⟩"),
        expect(Some("vertical"), Quantity::RicKK, constant(0.5), 1e-8, milnor),
        expect(Some("vertical"), Quantity::KappaAbs, constant(0.0), 1e-7, milnor),
        expect(Some("vertical"), Quantity::Div, constant(0.0), 1e-7, "unimodular group"),
        expect(Some("vertical"), Quantity::SigmaAbs, constant(0.0), 1e-7, "metric independent of z: ∂z is Killing"),
        expect(Some("vertical"), Quantity::KillingResidual, constant(0.0), 1e-7, "metric independent of z"),
        expect(Some("horizontal"), Quantity::RicKK, constant(-0.5), 1e-8, milnor),
        expect(Some("horizontal"), Quantity::OmegaAbs, constant(0.0), 1e-7, "e1♭ = dx is closed"),
        expect(Some("horizontal"), Quantity::Div, constant(0.0), 1e-7, "unimodular group"),
        expect(Some("horizontal"), Quantity::KappaAbs, constant(0.0), 1e-7, milnor),
        expect(Some("horizontal"), Quantity::SigmaAbs, constant(0.5), 1e-7, "Raychaudhuri with div = ω = 0: 2|σ|² = −Ric(e1,e1)"),
    ];
    CatalogEntry {
        manifold_id: "nil".into(),
        description: "Heisenberg group with left-invariant metric dx² + dy² + (dz − x dy)²".into(),
        params: CatalogParams::default(),
        chart,
        fields,
        expected,
        default_samples: 100,
    }
}
