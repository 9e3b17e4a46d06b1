use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::curvature::Christoffel;
use crate::error::{Error, Result};
use crate::fd::{self, STENCIL_REACH};

pub type Vec3 = Vector3<f64>;

/// Metric components `g_ij(u)` in chart coordinates.
pub type MetricFn = Arc<dyn Fn(&[f64; 3]) -> Matrix3<f64> + Send + Sync>;

/// Analytic partials: element `k` holds `∂g/∂u^k`.
pub type MetricPartialsFn = Arc<dyn Fn(&[f64; 3]) -> [Matrix3<f64>; 3] + Send + Sync>;

/// A point tagged with the chart it lives in. Used in reports; the numeric
/// pipeline itself passes bare coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartPoint {
    pub chart_id: String,
    pub u: [f64; 3],
}

/// Metric, inverse metric and volume factor at a point.
#[derive(Debug, Clone, Copy)]
pub struct MetricAt {
    pub g: Matrix3<f64>,
    pub g_inv: Matrix3<f64>,
    pub sqrt_det: f64,
}

impl MetricAt {
    pub fn inner(&self, a: &Vec3, b: &Vec3) -> f64 {
        (self.g * b).dot(a)
    }

    pub fn norm(&self, a: &Vec3) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// `g`-cross product `y^i = g^{il} √det ε_{ljm} a^j b^m`.
    pub fn cross(&self, a: &Vec3, b: &Vec3) -> Vec3 {
        let lowered = Vec3::new(
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ) * self.sqrt_det;
        self.g_inv * lowered
    }
}

/// A coordinate chart with a metric, an admissible domain box and the step
/// sizes used whenever derivatives are taken numerically.
#[derive(Clone)]
pub struct MetricChart {
    pub chart_id: String,
    pub domain: [(f64, f64); 3],
    pub margin: f64,
    /// Step for differencing `g` when analytic partials are absent.
    pub fd_step: f64,
    /// Step for differencing the Christoffel symbols into curvature.
    pub curvature_step: f64,
    g: MetricFn,
    dg: Option<MetricPartialsFn>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("chart_id", &self.chart_id)
            .field("domain", &self.domain)
            .field("margin", &self.margin)
            .field("fd_step", &self.fd_step)
            .field("analytic_partials", &self.dg.is_some())
            .finish()
    }
}

pub const DEFAULT_MARGIN: f64 = 1e-2;
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Step for differencing Christoffel symbols when they come from
/// finite-difference metric partials (noisier, so a wider step).
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-3;
/// Step for differencing Christoffel symbols built from analytic partials.
pub const ANALYTIC_CURVATURE_STEP: f64 = 2e-4;

impl MetricChart {
    pub fn new(chart_id: impl Into<String>, domain: [(f64, f64); 3], g: MetricFn) -> Self {
        Self {
            chart_id: chart_id.into(),
            domain,
            margin: DEFAULT_MARGIN,
            fd_step: DEFAULT_FD_STEP,
            curvature_step: DEFAULT_CURVATURE_STEP,
            g,
            dg: None,
        }
    }

    pub fn with_partials(mut self, dg: MetricPartialsFn) -> Self {
        self.dg = Some(dg);
        self.curvature_step = ANALYTIC_CURVATURE_STEP;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// The same chart with analytic partials dropped, forcing the
    /// finite-difference path.
    pub fn without_partials(&self) -> Self {
        let mut c = self.clone();
        c.dg = None;
        c.curvature_step = DEFAULT_CURVATURE_STEP;
        c
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.dg.is_some()
    }

    pub fn point(&self, u: [f64; 3]) -> ChartPoint {
        ChartPoint {
            chart_id: self.chart_id.clone(),
            u,
        }
    }

    pub fn contains(&self, u: &[f64; 3]) -> bool {
        self.domain
            .iter()
            .zip(u)
            .all(|(&(lo, hi), &x)| x > lo + self.margin && x < hi - self.margin)
    }

    pub fn check_point(&self, u: &[f64; 3]) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::PointOutsideChart {
                chart: self.chart_id.clone(),
                point: *u,
            })
        }
    }

    /// Ensures the axis-aligned stencil of half-width `reach` around `u` stays admissible.
    pub fn check_stencil(&self, u: &[f64; 3], reach: f64) -> Result<()> {
        let ok = self.domain.iter().zip(u).all(|(&(lo, hi), &x)| {
            x - reach > lo + self.margin && x + reach < hi - self.margin
        });
        if ok {
            Ok(())
        } else {
            Err(Error::StencilLeavesChart {
                chart: self.chart_id.clone(),
                point: *u,
            })
        }
    }

    /// Raw metric components without validation.
    pub fn g_raw(&self, u: &[f64; 3]) -> Matrix3<f64> {
        (self.g)(u)
    }

    pub fn metric_at(&self, u: &[f64; 3]) -> Result<MetricAt> {
        self.check_point(u)?;
        let g = (self.g)(u);
        fd::ensure_finite("metric", g.as_slice())?;
        // Sylvester's criterion on the leading principal minors.
        let m1 = g[(0, 0)];
        let m2 = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let det = g.determinant();
        if !(m1 > 0.0 && m2 > 0.0 && det > 0.0) {
            let eig = g.symmetric_eigenvalues();
            let eigenvalue = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(Error::MetricNotPositiveDefinite {
                chart: self.chart_id.clone(),
                point: *u,
                eigenvalue,
            });
        }
        let g_inv = g.try_inverse().ok_or_else(|| Error::MetricNotPositiveDefinite {
            chart: self.chart_id.clone(),
            point: *u,
            eigenvalue: 0.0,
        })?;
        Ok(MetricAt {
            g,
            g_inv,
            sqrt_det: det.sqrt(),
        })
    }

    /// `∂g/∂u^k` for k = 0..3, analytic when available.
    pub fn partials(&self, u: &[f64; 3]) -> Result<[Matrix3<f64>; 3]> {
        self.check_point(u)?;
        match &self.dg {
            Some(dg) => Ok(dg(u)),
            None => self.partials_fd(u),
        }
    }

    /// Finite-difference partials of `g`, regardless of analytic availability.
    pub fn partials_fd(&self, u: &[f64; 3]) -> Result<[Matrix3<f64>; 3]> {
        let h = self.fd_step;
        self.check_stencil(u, STENCIL_REACH * h)?;
        fd::gradient(|q| Ok((self.g)(q)), u, h)
    }

    pub fn christoffel(&self, u: &[f64; 3]) -> Result<Christoffel> {
        let m = self.metric_at(u)?;
        let dg = self.partials(u)?;
        Ok(Christoffel::from_metric(&m.g_inv, &dg))
    }

    /// `∇_w V` at `u` for a vector field given by chart components.
    pub fn covariant_derivative<F>(&self, u: &[f64; 3], field: F, w: &Vec3, step: f64) -> Result<Vec3>
    where
        F: Fn(&[f64; 3]) -> Result<Vec3>,
    {
        self.check_stencil(u, STENCIL_REACH * step)?;
        let v = field(u)?;
        let dv = fd::gradient(&field, u, step)?;
        let gamma = self.christoffel(u)?;
        let mut out = gamma.contract(w, &v);
        for j in 0..3 {
            out += dv[j] * w[j];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> MetricChart {
        MetricChart::new("flat", [(-2.0, 2.0); 3], Arc::new(|_| Matrix3::identity()))
            .with_partials(Arc::new(|_| [Matrix3::zeros(); 3]))
    }

    #[test]
    fn flat_metric_is_identity() {
        let m = flat().metric_at(&[0.3, -0.2, 1.0]).unwrap();
        assert_eq!(m.g, Matrix3::identity());
        assert_eq!(m.sqrt_det, 1.0);
    }

    #[test]
    fn outside_point_rejected() {
        let err = flat().metric_at(&[1.995, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::PointOutsideChart { .. }));
    }

    #[test]
    fn indefinite_metric_reports_eigenvalue() {
        let c = MetricChart::new(
            "bad",
            [(-1.0, 1.0); 3],
            Arc::new(|_| Matrix3::from_diagonal(&Vec3::new(1.0, -0.5, 1.0))),
        );
        match c.metric_at(&[0.0; 3]).unwrap_err() {
            Error::MetricNotPositiveDefinite { eigenvalue, .. } => {
                assert!((eigenvalue + 0.5).abs() < 1e-12)
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn stencil_near_edge_is_refused() {
        let c = flat();
        let f = |_: &[f64; 3]| Ok(Vec3::z());
        let err = c
            .covariant_derivative(&[1.9899, 0.0, 0.0], f, &Vec3::x(), 1e-3)
            .unwrap_err();
        assert!(matches!(err, Error::StencilLeavesChart { .. }));
    }

    #[test]
    fn cross_product_orientation() {
        let m = flat().metric_at(&[0.0; 3]).unwrap();
        let y = m.cross(&Vec3::z(), &Vec3::x());
        assert!((y - Vec3::y()).norm() < 1e-15);
    }
}
