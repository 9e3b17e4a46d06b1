//! Kinematics along geodesic integral curves: Raychaudhuri transport of the
//! divergence and rotation, the rotation dichotomy, focusing, and the
//! 2-principal checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::geodesic::{as_exit, geodesic_rhs};
use crate::geometry::ode::{rk4_step, uniform_steps};
use crate::geometry::{ChartPoint, CurvatureData, MetricChart, Riemann, Vec3};
use crate::triad::{FrameField, NumericConfig, Triad, VectorFieldSpec};
use crate::verify::{frame_derivative, Direction};

/// `|κ|` above which a field does not count as geodesic for transport.
pub const GEODESIC_TOL: f64 = 1e-6;

/// Divergence below `−DIVERGENCE_BLOWUP` counts as focused.
pub const DIVERGENCE_BLOWUP: f64 = 1e3;

/// Relative slack allowed when checking `div ≤ u` against the comparison
/// solution. Flat radial flows saturate the bound, so the excess there is
/// pure differencing error, which grows like `(frame_step/r)⁴` near a focus.
pub const COMPARISON_REL_TOL: f64 = 1e-3;

/// Frame-basis norm `(Σ_{abc} R(k,E_a,E_b,E_c)²)^{1/2}` of the curvature
/// slice along `k`; zero exactly when `R(k,·,·,·) = 0`.
pub fn sup_rk(riem: &Riemann, triad: &Triad) -> f64 {
    let e = triad.real_frame();
    let mut acc = 0.0;
    for a in &e {
        for b in &e {
            for c in &e {
                acc += riem.eval(&triad.k, a, b, c).powi(2);
            }
        }
    }
    acc.sqrt()
}

/// Pointwise kinematic scalars of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kinematics {
    pub k: [f64; 3],
    pub kappa_abs: f64,
    pub div: f64,
    pub omega: f64,
    pub shear_mag2: f64,
    pub ric_kk: f64,
    pub scalar: f64,
}

impl Kinematics {
    pub fn at(chart: &MetricChart, field: &VectorFieldSpec, u: &[f64; 3], config: NumericConfig) -> Result<Self> {
        let ff = FrameField::new(chart, field, u)?.with_config(config);
        let conn = ff.connection(u)?;
        let sc = conn.spin_coefficients();
        let curv = chart.curvature(u)?;
        let k = conn.triad.k;
        Ok(Kinematics {
            k: [k[0], k[1], k[2]],
            kappa_abs: sc.kappa.norm(),
            div: sc.div,
            omega: sc.omega,
            shear_mag2: sc.shear_mag2,
            ric_kk: (curv.ric * k).dot(&k),
            scalar: curv.scalar,
        })
    }

    /// `k[div]` predicted by the Raychaudhuri equation for a geodesic field.
    pub fn div_rate(&self, div: f64, omega: f64) -> f64 {
        0.5 * omega * omega - 2.0 * self.shear_mag2 - 0.5 * div * div - self.ric_kk
    }

    /// `|Ric(k,k) − (ω²/2 − 2|σ|²)|`, which vanishes for geodesic
    /// divergence-free fields.
    pub fn divergence_free_residual(&self) -> f64 {
        (self.ric_kk - (0.5 * self.omega * self.omega - 2.0 * self.shear_mag2)).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Direct,
    Transported,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    pub p: [f64; 3],
    pub v: [f64; 3],
    pub div: f64,
    pub omega: f64,
    pub shear_mag2: f64,
    #[serde(rename = "S")]
    pub scalar: f64,
    pub source: Source,
}

/// One row of a flow trace in its CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub div_direct: f64,
    pub div_transported: f64,
    pub omega_direct: f64,
    pub omega_transported: f64,
    pub shear_mag2: f64,
    #[serde(rename = "S")]
    pub scalar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTrace {
    pub chart_id: String,
    pub field_id: String,
    pub start: [f64; 3],
    pub length: f64,
    pub step: f64,
    pub transported: Vec<FlowState>,
    pub direct: Vec<FlowState>,
}

impl FlowTrace {
    pub fn max_div_deviation(&self) -> f64 {
        self.pairs().map(|(a, b)| (a.div - b.div).abs()).fold(0.0, f64::max)
    }

    pub fn max_omega_deviation(&self) -> f64 {
        self.pairs().map(|(a, b)| (a.omega - b.omega).abs()).fold(0.0, f64::max)
    }

    fn pairs(&self) -> impl Iterator<Item = (&FlowState, &FlowState)> {
        self.transported.iter().zip(&self.direct)
    }

    pub fn rows(&self) -> Vec<TraceRow> {
        self.pairs()
            .map(|(tr, d)| TraceRow {
                t: d.t,
                u1: d.p[0],
                u2: d.p[1],
                u3: d.p[2],
                v1: d.v[0],
                v2: d.v[1],
                v3: d.v[2],
                div_direct: d.div,
                div_transported: tr.div,
                omega_direct: d.omega,
                omega_transported: tr.omega,
                shear_mag2: d.shear_mag2,
                scalar: d.scalar,
            })
            .collect()
    }
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 {
        Ok(())
    } else {
        Err(Error::StepNotPositive(step))
    }
}

fn start_kinematics(chart: &MetricChart, field: &VectorFieldSpec, p0: &[f64; 3], config: NumericConfig) -> Result<Kinematics> {
    let kin = Kinematics::at(chart, field, p0, config)?;
    if kin.kappa_abs >= GEODESIC_TOL {
        return Err(Error::NotGeodesicField { kappa: kin.kappa_abs });
    }
    Ok(kin)
}

/// Follows the geodesic through `p0` tangent to the field and integrates
/// `(div, ω)` along it with RK4 from
/// `k[div] = ω²/2 − 2|σ|² − div²/2 − Ric(k,k)` and `k[ω] = −div·ω`,
/// sampling `|σ|²` and `Ric(k,k)` directly at every stage. Each step also
/// records a fresh direct evaluation for comparison.
pub fn transport_kinematics(
    chart: &MetricChart,
    field: &VectorFieldSpec,
    p0: &[f64; 3],
    length: f64,
    step: f64,
    config: NumericConfig,
) -> Result<FlowTrace> {
    check_step(step)?;
    let kin0 = start_kinematics(chart, field, p0, config)?;
    let (n, h) = uniform_steps(length, step);

    let state = |t: f64, p: [f64; 3], v: [f64; 3], div: f64, omega: f64, kin: &Kinematics, source| FlowState {
        t,
        p,
        v,
        div,
        omega,
        shear_mag2: kin.shear_mag2,
        scalar: kin.scalar,
        source,
    };

    let mut y = [p0[0], p0[1], p0[2], kin0.k[0], kin0.k[1], kin0.k[2], kin0.div, kin0.omega];
    let mut transported = vec![state(0.0, *p0, kin0.k, kin0.div, kin0.omega, &kin0, Source::Transported)];
    let mut direct = vec![state(0.0, *p0, kin0.k, kin0.div, kin0.omega, &kin0, Source::Direct)];

    for i in 0..n {
        let t = i as f64 * h;
        y = rk4_step(&y, h, |s| {
            let g = geodesic_rhs(chart, &[s[0], s[1], s[2], s[3], s[4], s[5]])?;
            let kin = Kinematics::at(chart, field, &[s[0], s[1], s[2]], config)?;
            let (div, omega) = (s[6], s[7]);
            Ok([g[0], g[1], g[2], g[3], g[4], g[5], kin.div_rate(div, omega), -div * omega])
        })
        .map_err(|e| as_exit(e, t))?;
        let t = (i + 1) as f64 * h;
        let p = [y[0], y[1], y[2]];
        let v = [y[3], y[4], y[5]];
        if !chart.contains(&p) {
            return Err(Error::LeftChartDomain { t_exit: t });
        }
        let kin = Kinematics::at(chart, field, &p, config).map_err(|e| as_exit(e, t))?;
        crate::fd::ensure_finite("transported kinematics", &y)?;
        transported.push(state(t, p, v, y[6], y[7], &kin, Source::Transported));
        direct.push(state(t, p, v, kin.div, kin.omega, &kin, Source::Direct));
    }

    Ok(FlowTrace {
        chart_id: chart.chart_id.clone(),
        field_id: field.field_id.clone(),
        start: *p0,
        length: n as f64 * h,
        step: h,
        transported,
        direct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaVerdict {
    /// `|ω| < tol` at every sample.
    ZeroAlongCurve,
    /// `|ω| > tol` at every sample.
    NonzeroAlongCurve,
    /// Samples on both sides of `tol`.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    pub length: f64,
    pub step: f64,
    pub samples: usize,
    pub omega_min_abs: f64,
    pub omega_max_abs: f64,
    pub sign_changes: usize,
    pub tol: f64,
    pub verdict: OmegaVerdict,
    pub statement: String,
}

impl OmegaReport {
    /// Classifies the directly sampled `ω` of a trace. Sign changes are
    /// counted only between samples with `|ω| > tol`.
    pub fn from_trace(trace: &FlowTrace, tol: f64) -> Self {
        let omegas: Vec<f64> = trace.direct.iter().map(|s| s.omega).collect();
        let min = omegas.iter().map(|w| w.abs()).fold(f64::INFINITY, f64::min);
        let max = omegas.iter().map(|w| w.abs()).fold(0.0, f64::max);
        let mut sign_changes = 0;
        let mut last: Option<f64> = None;
        for &w in &omegas {
            if w.abs() > tol {
                if let Some(prev) = last {
                    if prev.signum() != w.signum() {
                        sign_changes += 1;
                    }
                }
                last = Some(w);
            }
        }
        let verdict = if max < tol {
            OmegaVerdict::ZeroAlongCurve
        } else if min > tol {
            OmegaVerdict::NonzeroAlongCurve
        } else {
            OmegaVerdict::Mixed
        };
        let statement = match verdict {
            OmegaVerdict::ZeroAlongCurve => format!(
                "consistent with hypersurface-orthogonality along the whole segment: |omega| < {tol:e} at all {} samples over length {}",
                omegas.len(),
                trace.length
            ),
            OmegaVerdict::NonzeroAlongCurve => format!(
                "consistent with omega never vanishing along the segment: |omega| > {tol:e} at all {} samples over length {}",
                omegas.len(),
                trace.length
            ),
            OmegaVerdict::Mixed => format!(
                "not consistent with the rotation dichotomy: |omega| ranges over [{min:e}, {max:e}] across tol {tol:e}"
            ),
        };
        OmegaReport {
            length: trace.length,
            step: trace.step,
            samples: omegas.len(),
            omega_min_abs: min,
            omega_max_abs: max,
            sign_changes,
            tol,
            verdict,
            statement,
        }
    }
}

pub fn omega_rigidity(
    chart: &MetricChart,
    field: &VectorFieldSpec,
    p0: &[f64; 3],
    length: f64,
    step: f64,
    tol: f64,
    config: NumericConfig,
) -> Result<OmegaReport> {
    let trace = transport_kinematics(chart, field, p0, length, step, config)?;
    Ok(OmegaReport::from_trace(&trace, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocusingReport {
    pub length_used: f64,
    pub step: f64,
    /// First sample with negative divergence.
    pub t0: Option<f64>,
    pub div0: Option<f64>,
    /// `t0 + 2/|div(t0)|`, the blowup time of `u' = −u²/2` from `div(t0)`.
    pub predicted_blowup_t: Option<f64>,
    /// First sample with `div < −threshold`.
    pub crossing_t: Option<f64>,
    pub threshold: f64,
    /// `max(div − u)` over samples before the predicted blowup, relative to `max(1, |u|)`.
    pub max_comparison_excess: f64,
    pub comparison_holds: bool,
}

/// Running comparison of the divergence with `u' = −u²/2`.
#[derive(Default)]
struct Comparison {
    start: Option<(f64, f64)>,
    crossing_t: Option<f64>,
    excess: Option<f64>,
}

impl Comparison {
    fn observe(&mut self, t: f64, div: f64) {
        if self.start.is_none() && div < 0.0 {
            self.start = Some((t, div));
        }
        if let Some((t0, d0)) = self.start {
            if t < t0 + 2.0 / d0.abs() {
                let u = 1.0 / (1.0 / d0 + 0.5 * (t - t0));
                let e = (div - u) / u.abs().max(1.0);
                self.excess = Some(self.excess.map_or(e, |x| x.max(e)));
            }
        }
        if self.crossing_t.is_none() && div < -DIVERGENCE_BLOWUP {
            self.crossing_t = Some(t);
        }
    }
}

/// Marches along the geodesic, gating on `Ric(k,k) ≥ −tol` and `|ω| < tol`,
/// and compares the divergence with the solution of `u' = −u²/2` started at
/// the first negative value. The march stops once `div < −DIVERGENCE_BLOWUP`.
pub fn focusing_check(
    chart: &MetricChart,
    field: &VectorFieldSpec,
    p0: &[f64; 3],
    length: f64,
    step: f64,
    tol: f64,
    config: NumericConfig,
) -> Result<FocusingReport> {
    check_step(step)?;
    let gate = |kin: &Kinematics, t: f64| -> Result<()> {
        if kin.ric_kk < -tol {
            return Err(Error::HypothesesViolated(format!(
                "Ric(k,k) = {:e} < 0 at t = {t}",
                kin.ric_kk
            )));
        }
        if kin.omega.abs() >= tol {
            return Err(Error::HypothesesViolated(format!(
                "field is not hypersurface-orthogonal: |omega| = {:e} at t = {t}",
                kin.omega.abs()
            )));
        }
        Ok(())
    };

    let kin0 = start_kinematics(chart, field, p0, config)?;
    gate(&kin0, 0.0)?;
    let (n, h) = uniform_steps(length, step);

    let mut cmp = Comparison::default();
    cmp.observe(0.0, kin0.div);

    let mut y = [p0[0], p0[1], p0[2], kin0.k[0], kin0.k[1], kin0.k[2]];
    let mut t_end = 0.0;
    for i in 0..n {
        if cmp.crossing_t.is_some() {
            break;
        }
        let t = i as f64 * h;
        y = rk4_step(&y, h, |s| geodesic_rhs(chart, s)).map_err(|e| as_exit(e, t))?;
        let t = (i + 1) as f64 * h;
        let p = [y[0], y[1], y[2]];
        if !chart.contains(&p) {
            return Err(Error::LeftChartDomain { t_exit: t });
        }
        let kin = Kinematics::at(chart, field, &p, config).map_err(|e| as_exit(e, t))?;
        gate(&kin, t)?;
        cmp.observe(t, kin.div);
        t_end = t;
    }

    let excess = cmp.excess.unwrap_or(0.0).max(0.0);
    Ok(FocusingReport {
        length_used: t_end,
        step: h,
        t0: cmp.start.map(|s| s.0),
        div0: cmp.start.map(|s| s.1),
        predicted_blowup_t: cmp.start.map(|(t0, d0)| t0 + 2.0 / d0.abs()),
        crossing_t: cmp.crossing_t,
        threshold: DIVERGENCE_BLOWUP,
        max_comparison_excess: excess,
        comparison_holds: excess <= COMPARISON_REL_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalReport {
    pub point: ChartPoint,
    #[serde(rename = "sup_Rk")]
    pub sup_rk: f64,
    #[serde(rename = "kappaS_residual")]
    pub kappa_s_residual: f64,
    pub shear_omega_residual: f64,
    pub scalar_evolution_residual: f64,
    #[serde(rename = "S")]
    pub scalar: f64,
    pub killing_residual: f64,
    /// `max |R_ijkl| < tol` at the point.
    pub manifold_flat: bool,
    /// `sup_Rk < tol` on a non-flat point.
    pub two_principal: bool,
    pub killing: bool,
    pub tol: f64,
}

/// Curvature slice, `κS`, `|σ|² − ω²/4` and `k[S] + div·S` at one point.
pub fn principal_check(
    chart: &MetricChart,
    field: &VectorFieldSpec,
    u: &[f64; 3],
    tol: f64,
    config: NumericConfig,
) -> Result<PrincipalReport> {
    if !(tol > 0.0) {
        return Err(Error::BadParameter(format!("tolerance must be positive, got {tol}")));
    }
    let ff = FrameField::new(chart, field, u)?.with_config(config);
    let conn = ff.connection(u)?;
    let sc = conn.spin_coefficients();
    let curv: CurvatureData = chart.curvature(u)?;
    let s = curv.scalar;
    let k_s = frame_derivative(&ff, |q| Ok(chart.curvature(q)?.scalar.into()), u, Direction::K)?;
    let sup = sup_rk(&curv.riem, &conn.triad);
    let killing_residual = conn.killing_residual();
    let flat = curv.riem.max_abs() < tol;
    Ok(PrincipalReport {
        point: chart.point(*u),
        sup_rk: sup,
        kappa_s_residual: (sc.kappa * s).norm(),
        shear_omega_residual: (sc.shear_mag2 - 0.25 * sc.omega * sc.omega).abs(),
        scalar_evolution_residual: (k_s + sc.div * s).norm(),
        scalar: s,
        killing_residual,
        manifold_flat: flat,
        two_principal: !flat && sup < tol,
        killing: killing_residual < tol,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldbergSachsPoint {
    pub point: ChartPoint,
    #[serde(rename = "sup_Rk")]
    pub sup_rk: f64,
    pub killing_residual: f64,
    pub two_principal: bool,
    pub killing: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldbergSachsReport {
    pub tol: f64,
    #[serde(rename = "S")]
    pub scalar: f64,
    pub scalar_spread: f64,
    pub max_omega_abs: f64,
    pub points: Vec<GoldbergSachsPoint>,
    /// Both sides true at every sample.
    pub all_two_principal_and_killing: bool,
    /// Both sides false at every sample.
    pub all_neither: bool,
    pub biconditional_holds: bool,
}

/// For a hypersurface-orthogonal field on a manifold of constant nonzero
/// scalar curvature, checks pointwise that 2-principal and Killing agree.
pub fn goldberg_sachs_check(
    chart: &MetricChart,
    field: &VectorFieldSpec,
    points: &[[f64; 3]],
    tol: f64,
    config: NumericConfig,
) -> Result<GoldbergSachsReport> {
    if points.is_empty() {
        return Err(Error::BadParameter("no sample points".into()));
    }
    let reports: Vec<(PrincipalReport, f64)> = points
        .par_iter()
        .map(|u| {
            let r = principal_check(chart, field, u, tol, config)?;
            let omega = FrameField::new(chart, field, u)?
                .with_config(config)
                .spin_coefficients(u)?
                .omega;
            Ok((r, omega))
        })
        .collect::<Result<_>>()?;

    let s0 = reports[0].0.scalar;
    let spread = reports.iter().map(|(r, _)| (r.scalar - s0).abs()).fold(0.0, f64::max);
    let max_omega = reports.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max);
    if s0.abs() < tol {
        return Err(Error::HypothesesViolated(format!(
            "scalar curvature is not nonzero (S = {s0:e})"
        )));
    }
    if spread >= tol {
        return Err(Error::HypothesesViolated(format!(
            "scalar curvature is not constant over the samples (spread {spread:e})"
        )));
    }
    if max_omega >= tol {
        return Err(Error::HypothesesViolated(format!(
            "field is not hypersurface-orthogonal (max |omega| = {max_omega:e})"
        )));
    }

    let pts: Vec<GoldbergSachsPoint> = reports
        .iter()
        .map(|(r, _)| GoldbergSachsPoint {
            point: r.point.clone(),
            sup_rk: r.sup_rk,
            killing_residual: r.killing_residual,
            two_principal: r.two_principal,
            killing: r.killing,
            agree: r.two_principal == r.killing,
        })
        .collect();
    Ok(GoldbergSachsReport {
        tol,
        scalar: s0,
        scalar_spread: spread,
        max_omega_abs: max_omega,
        all_two_principal_and_killing: pts.iter().all(|p| p.two_principal && p.killing),
        all_neither: pts.iter().all(|p| !p.two_principal && !p.killing),
        biconditional_holds: pts.iter().all(|p| p.agree),
        points: pts,
    })
}

/// Unit initial velocity of the integral curve through `p0`.
pub fn initial_velocity(chart: &MetricChart, field: &VectorFieldSpec, p0: &[f64; 3]) -> Result<Vec3> {
    let m = chart.metric_at(p0)?;
    field.eval(&m, p0)
}
