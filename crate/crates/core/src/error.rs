use thiserror::Error;

/// Errors produced by the geometry, frame, verification and flow pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside chart `{chart}` (domain shrunk by margin)")]
    PointOutsideChart { chart: String, point: [f64; 3] },

    #[error("metric of chart `{chart}` is not positive definite at {point:?} (eigenvalue {eigenvalue:e})")]
    MetricNotPositiveDefinite {
        chart: String,
        point: [f64; 3],
        eigenvalue: f64,
    },

    #[error("finite-difference stencil around {point:?} leaves chart `{chart}`")]
    StencilLeavesChart { chart: String, point: [f64; 3] },

    #[error("geodesic left the chart domain at t = {t_exit}")]
    LeftChartDomain { t_exit: f64 },

    #[error("integration step must be positive, got {0}")]
    StepNotPositive(f64),

    #[error("initial velocity is not unit length (|v|_g = {0})")]
    NotUnitVelocity(f64),

    #[error("vector field `{field}` vanishes at {point:?}")]
    ZeroField { field: String, point: [f64; 3] },

    #[error("vector field `{field}` is not unit length at {point:?} (|K|_g = {norm})")]
    NotUnitField {
        field: String,
        point: [f64; 3],
        norm: f64,
    },

    #[error("no coordinate axis clears the frame seed angle at {0:?}")]
    FrameSeedDegenerate([f64; 3]),

    #[error("field is not geodesic at the start point (|kappa| = {kappa:e})")]
    NotGeodesicField { kappa: f64 },

    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),

    #[error("unknown field `{field}` on manifold `{manifold}`")]
    UnknownField { manifold: String, field: String },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("metric file error: {0}")]
    MetricFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
