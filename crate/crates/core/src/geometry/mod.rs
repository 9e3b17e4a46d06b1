//! Chart-based metric evaluation, Levi-Civita connection, curvature and geodesics.

mod chart;
mod curvature;
pub(crate) mod geodesic;
pub mod ode;

pub use chart::{ChartPoint, MetricAt, MetricChart, MetricFn, MetricPartialsFn, Vec3};
pub use curvature::{Christoffel, CurvatureData, Riemann};
pub use geodesic::{geodesic_integrate, GeodesicSample};

/// Classical complex-bilinear extension of the metric to complex vectors.
pub fn bilinear(g: &nalgebra::Matrix3<f64>, a: &CVec3, b: &CVec3) -> num_complex::Complex64 {
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            acc += a[i] * b[j] * g[(i, j)];
        }
    }
    acc
}

pub type CVec3 = nalgebra::Vector3<num_complex::Complex64>;

/// Promote a real chart vector to a complex one.
pub fn complexify(v: &Vec3) -> CVec3 {
    v.map(|x| num_complex::Complex64::new(x, 0.0))
}
