//! Residual checks of the structural identities tying spin coefficients to
//! curvature: the covariant-derivative and bracket tables, the Ricci-triad
//! relations, the frame expansion of the Riemann tensor, the five Sachs
//! equations and the two differential Bianchi identities.
//!
//! Spin coefficients and triad Ricci components are differentiated as chart
//! scalar fields through the whole pipeline, with the frame seed locked by
//! the [`FrameField`] so that neighbouring stencil points share one smooth
//! frame.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{self, STENCIL_REACH};
use crate::geometry::{complexify, CVec3, ChartPoint, CurvatureData, MetricChart, Vec3};
use crate::serde_complex;
use crate::triad::{Connection, FrameField, NumericConfig, SpinCoefficients, VectorFieldSpec, TK, TM, TMB};

type Coeffs = [[[f64; 3]; 3]; 3];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `v[f] = v^j ∂_j f`, complex-linear in `v`.
fn along(v: &CVec3, grad: &[Complex64; 3]) -> Complex64 {
    (0..3).map(|j| v[j] * grad[j]).sum()
}

/// `v[f̄]` from the gradient of `f`.
fn along_conj(v: &CVec3, grad: &[Complex64; 3]) -> Complex64 {
    (0..3).map(|j| v[j] * grad[j].conj()).sum()
}

fn pick<const N: usize>(grads: &[[Complex64; N]; 3], i: usize) -> [Complex64; 3] {
    [grads[0][i], grads[1][i], grads[2][i]]
}

/// Frame-basis Riemann values entering the Ricci-triad relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannFrame {
    /// `R(k,m,k,m)`
    #[serde(with = "serde_complex")]
    pub kmkm: Complex64,
    /// `R(k,m,k,m̄)`
    #[serde(with = "serde_complex")]
    pub kmkmbar: Complex64,
    /// `R(k,m,m,m̄)`
    #[serde(with = "serde_complex")]
    pub kmmmbar: Complex64,
    /// `R(m̄,m,m,m̄)`
    #[serde(with = "serde_complex")]
    pub mbarmmmbar: Complex64,
}

/// Ricci tensor contracted into the complex triad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriadCurvature {
    pub ric_kk: f64,
    #[serde(with = "serde_complex")]
    pub ric_mm: Complex64,
    #[serde(with = "serde_complex")]
    pub ric_km: Complex64,
    pub ric_mmbar: f64,
    /// Imaginary parts of `Ric(k,k)` and `Ric(m,m̄)`, zero up to rounding.
    pub imag_kk: f64,
    pub imag_mmbar: f64,
    pub riem_frame: RiemannFrame,
}

fn ricci_c(curv: &CurvatureData, a: &CVec3, b: &CVec3) -> Complex64 {
    let mut acc = c(0.0);
    for i in 0..3 {
        for j in 0..3 {
            acc += a[i] * b[j] * curv.ric[(i, j)];
        }
    }
    acc
}

impl TriadCurvature {
    pub fn new(curv: &CurvatureData, k: &CVec3, m: &CVec3, mbar: &CVec3) -> Self {
        let kk = ricci_c(curv, k, k);
        let mmb = ricci_c(curv, m, mbar);
        let r = &curv.riem;
        TriadCurvature {
            ric_kk: kk.re,
            ric_mm: ricci_c(curv, m, m),
            ric_km: ricci_c(curv, k, m),
            ric_mmbar: mmb.re,
            imag_kk: kk.im,
            imag_mmbar: mmb.im,
            riem_frame: RiemannFrame {
                kmkm: r.eval_c(k, m, k, m),
                kmkmbar: r.eval_c(k, m, k, mbar),
                kmmmbar: r.eval_c(k, m, m, mbar),
                mbarmmmbar: r.eval_c(mbar, m, m, mbar),
            },
        }
    }

    pub fn from_connection(curv: &CurvatureData, conn: &Connection) -> Self {
        Self::new(
            curv,
            &conn.triad_vector(TK),
            &conn.triad_vector(TM),
            &conn.triad_vector(TMB),
        )
    }

    /// `[Ric(k,k), Ric(m,m), Ric(k,m), Ric(m,m̄)]` as complex scalars.
    pub fn as_array(&self) -> [Complex64; 4] {
        [c(self.ric_kk), self.ric_mm, self.ric_km, c(self.ric_mmbar)]
    }

    /// Largest deviation among the four Ricci-triad relations and the
    /// reality of `Ric(k,k)` and `Ric(m,m̄)`.
    pub fn star_residual(&self) -> f64 {
        let f = &self.riem_frame;
        [
            (self.ric_mm + f.kmkm).norm(),
            (c(self.ric_kk) + 2.0 * f.kmkmbar).norm(),
            (self.ric_km + f.kmmmbar).norm(),
            (c(self.ric_mmbar) - (c(0.5 * self.ric_kk) - f.mbarmmmbar)).norm(),
            self.imag_kk.abs(),
            self.imag_mmbar.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Direction of a frame derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    K,
    M,
    Mbar,
}

/// Derivative of a scalar field along `k`, `m` or `m̄` of the frame field
/// at `u`: the five-point chart gradient with step `deriv_step`, contracted
/// with the direction's chart components.
pub fn frame_derivative<F>(ff: &FrameField, f: F, u: &[f64; 3], direction: Direction) -> Result<Complex64>
where
    F: Fn(&[f64; 3]) -> Result<Complex64>,
{
    let h = ff.config.deriv_step;
    ff.chart.check_stencil(u, STENCIL_REACH * h)?;
    let grad = fd::gradient(f, u, h)?;
    let triad = ff.frame(u)?;
    let v = match direction {
        Direction::K => complexify(&triad.k),
        Direction::M => triad.m,
        Direction::Mbar => triad.mbar,
    };
    Ok(along(&v, &grad))
}

/// Everything the identity checks need at one point.
pub struct Probe<'a> {
    pub ff: FrameField<'a>,
    pub u: [f64; 3],
    pub conn: Connection,
    pub sc: SpinCoefficients,
    pub curvature: CurvatureData,
    pub tc: TriadCurvature,
}

impl<'a> Probe<'a> {
    pub fn new(ff: FrameField<'a>, u: &[f64; 3]) -> Result<Self> {
        ff.chart.check_stencil(u, ff.config.reach(ff.chart))?;
        let conn = ff.connection(u)?;
        let sc = conn.spin_coefficients();
        let curvature = ff.chart.curvature(u)?;
        let tc = TriadCurvature::from_connection(&curvature, &conn);
        fd::ensure_finite(
            "spin coefficients",
            &sc.as_array().iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        )?;
        Ok(Probe {
            ff,
            u: *u,
            conn,
            sc,
            curvature,
            tc,
        })
    }

    fn vectors(&self) -> (CVec3, CVec3, CVec3) {
        (
            self.conn.triad_vector(TK),
            self.conn.triad_vector(TM),
            self.conn.triad_vector(TMB),
        )
    }

    /// Chart gradients of the connection table and of `[κ, ρ, σ, ε, β]`.
    pub fn connection_gradients(&self) -> Result<[(Coeffs, [Complex64; 5]); 3]> {
        fd::gradient(
            |q| {
                let conn = self.ff.connection(q)?;
                Ok((conn.coeff, conn.spin_coefficients().as_array()))
            },
            &self.u,
            self.ff.config.deriv_step,
        )
    }

    /// Chart gradients of `[Ric(k,k), Ric(m,m), Ric(k,m), Ric(m,m̄)]`.
    pub fn ricci_gradients(&self) -> Result<[[Complex64; 4]; 3]> {
        fd::gradient(
            |q| {
                let curv = self.ff.chart.curvature(q)?;
                let t = self.ff.frame(q)?;
                let tc = TriadCurvature::new(&curv, &complexify(&t.k), &t.m, &t.mbar);
                Ok(tc.as_array())
            },
            &self.u,
            self.ff.config.deriv_step,
        )
    }

    /// The five covariant derivatives of the triad
    /// against their spin-coefficient expansions, compared in frame components.
    pub fn covariant_table_residual(&self) -> f64 {
        let (k, m, mb) = self.vectors();
        let SpinCoefficients {
            kappa,
            rho,
            sigma,
            epsilon,
            beta,
            ..
        } = self.sc;
        let n = |a, b| self.conn.nabla_triad(a, b);
        let pairs = [
            (n(TK, TK), -(m * kappa.conj()) - mb * kappa),
            (n(TM, TK), -(m * rho.conj()) - mb * sigma),
            (n(TK, TM), k * kappa + m * epsilon),
            (n(TM, TM), k * sigma + m * beta),
            (n(TM, TMB), k * rho.conj() - mb * beta),
        ];
        self.max_frame_residual(&pairs)
    }

    /// Bracket residual: `[k,m]` and `[m,m̄]` from chart partials of the frame
    /// (no Christoffel symbols) against their spin-coefficient expansions.
    pub fn bracket_residual(&self) -> f64 {
        let (k, m, mb) = self.vectors();
        let SpinCoefficients {
            kappa,
            rho,
            sigma,
            epsilon,
            beta,
            ..
        } = self.sc;
        let pairs = [
            (
                self.conn.bracket_triad(TK, TM),
                k * kappa + m * (epsilon + rho.conj()) + mb * sigma,
            ),
            (
                self.conn.bracket_triad(TM, TMB),
                k * (rho.conj() - rho) + m * beta.conj() - mb * beta,
            ),
        ];
        self.max_frame_residual(&pairs)
    }

    fn max_frame_residual(&self, pairs: &[(CVec3, CVec3)]) -> f64 {
        pairs
            .iter()
            .flat_map(|(lhs, rhs)| self.conn.frame_components(&(lhs - rhs)))
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Ricci-triad relations plus the trace display
    /// `Σ_a R(E_a,v,w,E_a) = R(k,v,w,k) + R(m,v,w,m̄) + R(m̄,v,w,m)` over
    /// coordinate basis slot pairs.
    pub fn ricci_star_residual(&self) -> f64 {
        let (k, m, mb) = self.vectors();
        let r = &self.curvature.riem;
        let mut worst = self.tc.star_residual();
        for i in 0..3 {
            for j in 0..3 {
                let v = complexify(&Vec3::ith(i, 1.0));
                let w = complexify(&Vec3::ith(j, 1.0));
                let trace = r.eval_c(&k, &v, &w, &k) + r.eval_c(&m, &v, &w, &mb) + r.eval_c(&mb, &v, &w, &m);
                worst = worst.max((trace - self.curvature.ric[(i, j)]).norm());
            }
        }
        worst
    }

    /// Frame expansion of the Riemann tensor through the connection table
    /// and its derivatives, against the chart tensor contracted into the frame.
    pub fn riemann_frame_residual(&self, dcoeff: &[Coeffs; 3]) -> f64 {
        let e = self.conn.triad.real_frame();
        let cf = &self.conn.coeff;
        // E_a[C_bcd]
        let dir = |a: usize, b: usize, cc: usize, d: usize| -> f64 { (0..3).map(|j| e[a][j] * dcoeff[j][b][cc][d]).sum() };
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for d in 0..3 {
                        let mut lhs = dir(a, b, cc, d) - dir(b, a, cc, d);
                        for x in 0..3 {
                            lhs += cf[b][cc][x] * cf[a][x][d] - cf[a][cc][x] * cf[b][x][d]
                                - (cf[a][b][x] - cf[b][a][x]) * cf[x][cc][d];
                        }
                        let rhs = self.curvature.riem.eval(&e[a], &e[b], &e[cc], &e[d]);
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        worst
    }

    /// The five Sachs residuals `|LHS − RHS|`.
    pub fn sachs_residuals(&self, dsc: &[[Complex64; 5]; 3]) -> [f64; 5] {
        let (k, m, mb) = self.vectors();
        let SpinCoefficients {
            kappa: ka,
            rho,
            sigma: si,
            epsilon: ep,
            beta: be,
            ..
        } = self.sc;
        let [gka, grho, gsi, gep, gbe] = std::array::from_fn(|i| pick(dsc, i));
        let rkk = c(self.tc.ric_kk);
        let rmm = self.tc.ric_mm;
        let rkm = self.tc.ric_km;
        let rmmb = c(self.tc.ric_mmbar);
        let s1 = along(&k, &grho) - along(&mb, &gka)
            - (c(ka.norm_sqr() + si.norm_sqr()) + rho * rho + ka * be.conj() + 0.5 * rkk);
        let s2 = along(&k, &gsi) - along(&m, &gka)
            - (ka * ka + 2.0 * si * ep + si * (rho + rho.conj()) - ka * be + rmm);
        let s3 = along(&m, &grho) - along(&mb, &gsi) - (2.0 * si * be.conj() + (rho.conj() - rho) * ka + rkm);
        let s4 = along(&k, &gbe) - along(&m, &gep)
            - (si * (ka.conj() - be.conj()) + ka * (ep - rho.conj()) + be * (ep + rho.conj()) - rkm);
        let s5 = along_conj(&m, &gbe) + along(&mb, &gbe)
            - (c(si.norm_sqr() - rho.norm_sqr() - 2.0 * be.norm_sqr()) + (rho - rho.conj()) * ep - rmmb
                + 0.5 * rkk);
        [s1.norm(), s2.norm(), s3.norm(), s4.norm(), s5.norm()]
    }

    /// The two differential Bianchi residuals.
    pub fn bianchi_residuals(&self, dric: &[[Complex64; 4]; 3]) -> [f64; 2] {
        let (k, m, mb) = self.vectors();
        let SpinCoefficients {
            kappa: ka,
            rho,
            sigma: si,
            epsilon: ep,
            beta: be,
            ..
        } = self.sc;
        let [gkk, gmm, gkm, gmmb] = std::array::from_fn(|i| pick(dric, i));
        let rkk = c(self.tc.ric_kk);
        let rmm = self.tc.ric_mm;
        let rkm = self.tc.ric_km;
        let rmmb = c(self.tc.ric_mmbar);
        let b1 = along(&k, &gkm) - 0.5 * along(&m, &gkk) + along(&mb, &gmm)
            - (ka * rkk + (ep + 2.0 * rho + rho.conj()) * rkm + si * rkm.conj()
                - (ka.conj() + 2.0 * be.conj()) * rmm
                - ka * rmmb);
        let k_diff: [Complex64; 3] = std::array::from_fn(|j| gmmb[j] - 0.5 * gkk[j]);
        let b2 = along_conj(&m, &gkm) + along(&mb, &gkm) - along(&k, &k_diff)
            - ((rho + rho.conj()) * (rkk - rmmb) - si.conj() * rmm - si * rmm.conj()
                - (2.0 * ka.conj() + be.conj()) * rkm
                - (2.0 * ka + be) * rkm.conj());
        [b1.norm(), b2.norm()]
    }

    /// Every residual at this point, in [`EQUATION_IDS`] order.
    pub fn all_residuals(&self) -> Result<[f64; EQUATION_COUNT]> {
        let grads = self.connection_gradients()?;
        let dcoeff = grads.map(|g| g.0);
        let dsc = grads.map(|g| g.1);
        let dric = self.ricci_gradients()?;
        let s = self.sachs_residuals(&dsc);
        let b = self.bianchi_residuals(&dric);
        let out = [
            self.covariant_table_residual(),
            self.bracket_residual(),
            s[0],
            s[1],
            s[2],
            s[3],
            s[4],
            b[0],
            b[1],
            self.ricci_star_residual(),
            self.riemann_frame_residual(&dcoeff),
        ];
        fd::ensure_finite("identity residuals", &out)?;
        Ok(out)
    }
}

pub const EQUATION_COUNT: usize = 11;

/// Report order of the identity checks.
pub const EQUATION_IDS: [&str; EQUATION_COUNT] = [
    "cov_table",
    "brackets",
    "sachs1",
    "sachs2",
    "sachs3",
    "sachs4",
    "sachs5",
    "bianchi1",
    "bianchi2",
    "ricci_star",
    "riemann_frame",
];

/// Aggregated residual of one identity over a set of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equation_id: String,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub worst_point: Option<ChartPoint>,
}

impl ResidualReport {
    /// Builds a report from per-point residuals (in point order).
    pub fn from_residuals(equation_id: &str, chart: &MetricChart, points: &[[f64; 3]], residuals: &[f64], tol: f64) -> Self {
        let mut max = 0.0f64;
        let mut worst = None;
        for (p, &r) in points.iter().zip(residuals) {
            if worst.is_none() || r > max {
                max = r;
                worst = Some(chart.point(*p));
            }
        }
        let mean = if residuals.is_empty() {
            0.0
        } else {
            residuals.iter().sum::<f64>() / residuals.len() as f64
        };
        ResidualReport {
            equation_id: equation_id.to_string(),
            points: residuals.len(),
            max_residual: max,
            mean_residual: mean,
            tol,
            pass: max < tol,
            worst_point: worst,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("tolerance must be positive, got {tol}")))
    }
}

fn single(
    equation_id: &str,
    chart: &MetricChart,
    field: &VectorFieldSpec,
    p: &[f64; 3],
    tol: f64,
    f: impl FnOnce(&Probe) -> Result<f64>,
) -> Result<ResidualReport> {
    check_tol(tol)?;
    let probe = Probe::new(FrameField::new(chart, field, p)?, p)?;
    let r = f(&probe)?;
    Ok(ResidualReport::from_residuals(equation_id, chart, &[*p], &[r], tol))
}

pub fn check_covariant_table(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64; 3], tol: f64) -> Result<ResidualReport> {
    single("cov_table", chart, field, p, tol, |pr| Ok(pr.covariant_table_residual()))
}

pub fn check_brackets(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64; 3], tol: f64) -> Result<ResidualReport> {
    single("brackets", chart, field, p, tol, |pr| Ok(pr.bracket_residual()))
}

pub fn check_ricci_triad(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64; 3], tol: f64) -> Result<ResidualReport> {
    single("ricci_star", chart, field, p, tol, |pr| Ok(pr.ricci_star_residual()))
}

pub fn check_riemann_frame(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64; 3], tol: f64) -> Result<ResidualReport> {
    single("riemann_frame", chart, field, p, tol, |pr| {
        let d = pr.connection_gradients()?.map(|g| g.0);
        Ok(pr.riemann_frame_residual(&d))
    })
}

/// One report per Sachs equation.
pub fn check_sachs(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64; 3], tol: f64) -> Result<Vec<ResidualReport>> {
    check_tol(tol)?;
    let probe = Probe::new(FrameField::new(chart, field, p)?, p)?;
    let dsc = probe.connection_gradients()?.map(|g| g.1);
    let r = probe.sachs_residuals(&dsc);
    Ok((0..5)
        .map(|i| ResidualReport::from_residuals(EQUATION_IDS[2 + i], chart, &[*p], &[r[i]], tol))
        .collect())
}

/// One report per Bianchi identity.
pub fn check_bianchi(chart: &MetricChart, field: &VectorFieldSpec, p: &[f64; 3], tol: f64) -> Result<Vec<ResidualReport>> {
    check_tol(tol)?;
    let probe = Probe::new(FrameField::new(chart, field, p)?, p)?;
    let r = probe.bianchi_residuals(&probe.ricci_gradients()?);
    Ok((0..2)
        .map(|i| ResidualReport::from_residuals(EQUATION_IDS[7 + i], chart, &[*p], &[r[i]], tol))
        .collect())
}

/// Runs every identity check at each point, anchoring the frame seed at the
/// point itself, and aggregates one report per identity.
pub fn verify_batch(
    chart: &MetricChart,
    field: &VectorFieldSpec,
    points: &[[f64; 3]],
    config: NumericConfig,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    verify_batch_with(chart, points, tol, |u| {
        Ok(FrameField::new(chart, field, u)?.with_config(config))
    })
}

/// As [`verify_batch`] with a caller-built frame field per point, e.g. a
/// gauge-rotated one.
pub fn verify_batch_with<'a, F>(chart: &MetricChart, points: &[[f64; 3]], tol: f64, make: F) -> Result<Vec<ResidualReport>>
where
    F: Fn(&[f64; 3]) -> Result<FrameField<'a>> + Sync,
{
    check_tol(tol)?;
    let per_point: Vec<[f64; EQUATION_COUNT]> = points
        .par_iter()
        .map(|u| Probe::new(make(u)?, u)?.all_residuals())
        .collect::<Result<_>>()?;
    Ok((0..EQUATION_COUNT)
        .map(|e| {
            let col: Vec<f64> = per_point.iter().map(|r| r[e]).collect();
            ResidualReport::from_residuals(EQUATION_IDS[e], chart, points, &col, tol)
        })
        .collect())
}
