//! Built-in model manifolds with analytic metric partials, their named unit
//! vector fields and regression tables of expected values.
//!
//! Every expected value records the independent oracle it was derived from.

mod custom;
pub mod expr;
mod models;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use custom::{load_metric_file, parse_metric_file};

use crate::error::{Error, Result};
use crate::flow::sup_rk;
use crate::geometry::MetricChart;
use crate::triad::{FrameField, NumericConfig, VectorFieldSpec};

/// Parameters of the parametrised families.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CatalogParams {
    /// Radius of `s3_round`.
    pub r: Option<f64>,
    /// Fibre stretch of `berger`.
    pub lambda: Option<f64>,
}

/// Quantities with tabulated expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    ScalarCurvature,
    RicKK,
    KappaAbs,
    SigmaAbs,
    Div,
    OmegaAbs,
    KillingResidual,
    SupRk,
}

pub type ScalarFn = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ExpectedValue {
    Constant(f64),
    /// Closed form in chart coordinates.
    Closed(ScalarFn),
}

impl ExpectedValue {
    pub fn at(&self, u: &[f64; 3]) -> f64 {
        match self {
            ExpectedValue::Constant(c) => *c,
            ExpectedValue::Closed(f) => f(u),
        }
    }
}

impl fmt::Debug for ExpectedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectedValue::Constant(c) => write!(f, "Constant({c})"),
            ExpectedValue::Closed(_) => write!(f, "Closed(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expected {
    /// `None` for manifold-level quantities such as the scalar curvature.
    pub field_id: Option<String>,
    pub quantity: Quantity,
    pub value: ExpectedValue,
    pub tol: f64,
    pub oracle: &'static str,
}

/// A named field together with where to sample it and how far to flow it.
#[derive(Debug, Clone)]
pub struct FieldEntry {
    pub spec: VectorFieldSpec,
    pub description: &'static str,
    pub sample_box: [(f64, f64); 3],
    pub flow_start: [f64; 3],
    pub flow_length: f64,
    pub geodesic: bool,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub manifold_id: String,
    pub description: String,
    pub params: CatalogParams,
    pub chart: MetricChart,
    pub fields: Vec<FieldEntry>,
    pub expected: Vec<Expected>,
    pub default_samples: usize,
}

impl CatalogEntry {
    pub fn field(&self, field_id: &str) -> Result<&FieldEntry> {
        self.fields
            .iter()
            .find(|f| f.spec.field_id == field_id)
            .ok_or_else(|| Error::UnknownField {
                manifold: self.manifold_id.clone(),
                field: field_id.to_string(),
            })
    }

    pub fn field_ids(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.spec.field_id.as_str()).collect()
    }
}

/// Ids of the compiled-in manifolds, in listing order.
pub const MANIFOLD_IDS: [&str; 6] = ["euclidean", "s3_round", "h3", "h2xr", "nil", "berger"];

pub fn load(manifold_id: &str, params: CatalogParams) -> Result<CatalogEntry> {
    let positive = |name: &str, v: Option<f64>, default: f64| -> Result<f64> {
        let v = v.unwrap_or(default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::BadParameter(format!("{name} must be positive, got {v}")))
        }
    };
    match manifold_id {
        "euclidean" => Ok(models::euclidean()),
        "s3_round" => Ok(models::s3_round(positive("r", params.r, 1.0)?)),
        "h3" => Ok(models::h3()),
        "h2xr" => Ok(models::h2xr()),
        "nil" => Ok(models::nil()),
        "berger" => Ok(models::berger(positive("lambda", params.lambda, models::DEFAULT_BERGER_LAMBDA)?)),
        other => Err(Error::UnknownManifold(other.to_string())),
    }
}

/// Loads every built-in manifold with default parameters.
pub fn all() -> Vec<CatalogEntry> {
    MANIFOLD_IDS
        .iter()
        .map(|id| load(id, CatalogParams::default()).expect("built-in entry"))
        .collect()
}

/// Pipeline value of `quantity` at `u`; field quantities need `field`.
pub fn evaluate(
    chart: &MetricChart,
    field: Option<&VectorFieldSpec>,
    quantity: Quantity,
    u: &[f64; 3],
    config: NumericConfig,
) -> Result<f64> {
    let curv = chart.curvature(u)?;
    if quantity == Quantity::ScalarCurvature {
        return Ok(curv.scalar);
    }
    let field = field.ok_or_else(|| Error::BadParameter(format!("{quantity:?} needs a vector field")))?;
    let conn = FrameField::new(chart, field, u)?.with_config(config).connection(u)?;
    let sc = conn.spin_coefficients();
    let k = conn.triad.k;
    Ok(match quantity {
        Quantity::ScalarCurvature => unreachable!(),
        Quantity::RicKK => (curv.ric * k).dot(&k),
        Quantity::KappaAbs => sc.kappa.norm(),
        Quantity::SigmaAbs => sc.sigma.norm(),
        Quantity::Div => sc.div,
        Quantity::OmegaAbs => sc.omega.abs(),
        Quantity::KillingResidual => conn.killing_residual(),
        Quantity::SupRk => sup_rk(&curv.riem, &conn.triad),
    })
}

/// Outcome of one expected-table row over a set of sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedCheck {
    pub field_id: Option<String>,
    pub quantity: Quantity,
    pub max_error: f64,
    pub tol: f64,
    pub pass: bool,
    pub oracle: &'static str,
}

/// Evaluates every expected-table row at `n` seeded points of the sampling
/// box of its field (the first field's box for manifold-level rows).
pub fn check_expected(entry: &CatalogEntry, n: usize, seed: u64, config: NumericConfig) -> Result<Vec<ExpectedCheck>> {
    let reach = config.reach(&entry.chart);
    entry
        .expected
        .iter()
        .map(|row| {
            let fe = match &row.field_id {
                Some(id) => Some(entry.field(id)?),
                None => entry.fields.first(),
            };
            let bounds = fe.map_or(entry.chart.domain, |f| f.sample_box);
            let points = crate::sampling::sample_points(&entry.chart, &bounds, n, seed, reach)?;
            let spec = row.field_id.as_ref().and(fe.map(|f| &f.spec));
            let mut max_error = 0.0f64;
            for u in &points {
                let got = evaluate(&entry.chart, spec, row.quantity, u, config)?;
                max_error = max_error.max((got - row.value.at(u)).abs());
            }
            Ok(ExpectedCheck {
                field_id: row.field_id.clone(),
                quantity: row.quantity,
                max_error,
                tol: row.tol,
                pass: max_error < row.tol,
                oracle: row.oracle,
            })
        })
        .collect()
}
