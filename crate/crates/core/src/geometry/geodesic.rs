use serde::Serialize;

use super::chart::{MetricChart, Vec3};
use super::ode::{rk4_step, uniform_steps};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub u: [f64; 3],
    pub v: [f64; 3],
}

pub(crate) fn geodesic_rhs(chart: &MetricChart, y: &[f64; 6]) -> Result<[f64; 6]> {
    let u = [y[0], y[1], y[2]];
    let v = Vec3::new(y[3], y[4], y[5]);
    let acc = -chart.christoffel(&u)?.contract(&v, &v);
    Ok([v[0], v[1], v[2], acc[0], acc[1], acc[2]])
}

/// Maps domain failures during a step to `LeftChartDomain` at time `t`.
pub(crate) fn as_exit(err: Error, t: f64) -> Error {
    match err {
        Error::PointOutsideChart { .. } | Error::StencilLeavesChart { .. } => {
            Error::LeftChartDomain { t_exit: t }
        }
        e => e,
    }
}

/// Integrates the geodesic equation `ü^k = −Γ^k_ij u̇^i u̇^j` with classical
/// RK4 and uniform step no larger than `step`. The returned trace starts with
/// the initial state; a zero `length` yields just that state.
pub fn geodesic_integrate(
    chart: &MetricChart,
    p0: &[f64; 3],
    v0: &Vec3,
    length: f64,
    step: f64,
) -> Result<Vec<GeodesicSample>> {
    if !(step > 0.0) {
        return Err(Error::StepNotPositive(step));
    }
    let m = chart.metric_at(p0)?;
    let speed = m.norm(v0);
    if (speed - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVelocity(speed));
    }
    let (n, h) = uniform_steps(length, step);
    let mut y = [p0[0], p0[1], p0[2], v0[0], v0[1], v0[2]];
    let mut out = Vec::with_capacity(n + 1);
    out.push(GeodesicSample {
        t: 0.0,
        u: *p0,
        v: [v0[0], v0[1], v0[2]],
    });
    for i in 0..n {
        let t = i as f64 * h;
        y = rk4_step(&y, h, |s| geodesic_rhs(chart, s)).map_err(|e| as_exit(e, t))?;
        let u = [y[0], y[1], y[2]];
        if !chart.contains(&u) {
            return Err(Error::LeftChartDomain { t_exit: t + h });
        }
        out.push(GeodesicSample {
            t: (i + 1) as f64 * h,
            u,
            v: [y[3], y[4], y[5]],
        });
    }
    Ok(out)
}
