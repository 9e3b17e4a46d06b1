//! Orthonormal frames, complex triads and the five spin coefficients of a unit
//! vector field.
//!
//! A frame field `{k, x, y}` is seeded from the first coordinate axis that
//! makes an angle of more than 25° with `k`; the seed axis is chosen once at an
//! anchor point and then kept fixed, so the frame is a smooth field on the
//! anchor's neighbourhood and spin coefficients can be differentiated. The
//! complex triad uses `m = (x − i y)/√2` and the complex-*bilinear* extension
//! of the metric, under which `⟨m,m⟩ = 0` and `⟨m,m̄⟩ = 1`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{self, STENCIL_REACH};
use crate::geometry::{bilinear, CVec3, MetricAt, MetricChart, Vec3};
use crate::serde_complex;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Cosine of the 25° seed-angle threshold.
fn seed_cos_limit() -> f64 {
    25f64.to_radians().cos()
}

pub type FieldFn = Arc<dyn Fn(&[f64; 3]) -> Vec3 + Send + Sync>;
pub type GaugeFn = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

/// A named vector field, normalized to unit length on evaluation unless
/// `normalize` is false, in which case it must already be unit.
#[derive(Clone)]
pub struct VectorFieldSpec {
    pub field_id: String,
    pub normalize: bool,
    field: FieldFn,
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldSpec")
            .field("field_id", &self.field_id)
            .field("normalize", &self.normalize)
            .finish()
    }
}

impl VectorFieldSpec {
    pub fn new(field_id: impl Into<String>, field: FieldFn) -> Self {
        Self {
            field_id: field_id.into(),
            normalize: true,
            field,
        }
    }

    pub fn unnormalized(mut self) -> Self {
        self.normalize = false;
        self
    }

    pub fn raw(&self, u: &[f64; 3]) -> Vec3 {
        (self.field)(u)
    }

    /// The unit field at `u`.
    pub fn eval(&self, metric: &MetricAt, u: &[f64; 3]) -> Result<Vec3> {
        let v = (self.field)(u);
        fd::ensure_finite(&self.field_id, v.as_slice())?;
        let norm = metric.norm(&v);
        if !(norm > 1e-300) {
            return Err(Error::ZeroField {
                field: self.field_id.clone(),
                point: *u,
            });
        }
        if self.normalize {
            Ok(v / norm)
        } else if (norm - 1.0).abs() > 1e-10 {
            Err(Error::NotUnitField {
                field: self.field_id.clone(),
                point: *u,
                norm,
            })
        } else {
            Ok(v)
        }
    }
}

/// Orthonormal frame and complex triad at a point, in chart components.
#[derive(Debug, Clone, Serialize)]
pub struct Triad {
    pub p: [f64; 3],
    #[serde(serialize_with = "ser_vec3")]
    pub k: Vec3,
    #[serde(serialize_with = "ser_vec3")]
    pub x: Vec3,
    #[serde(serialize_with = "ser_vec3")]
    pub y: Vec3,
    #[serde(serialize_with = "ser_cvec3")]
    pub m: CVec3,
    #[serde(serialize_with = "ser_cvec3")]
    pub mbar: CVec3,
}

fn ser_vec3<S: serde::Serializer>(v: &Vec3, s: S) -> std::result::Result<S::Ok, S::Error> {
    [v[0], v[1], v[2]].serialize(s)
}

fn ser_cvec3<S: serde::Serializer>(v: &CVec3, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde_complex::vec3::serialize(&[v[0], v[1], v[2]], s)
}

impl Triad {
    fn from_real(p: [f64; 3], k: Vec3, x: Vec3, y: Vec3) -> Self {
        let m = (x.map(|c| Complex64::new(c, 0.0)) - y.map(|c| Complex64::new(0.0, c))) * Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mbar = m.map(|z| z.conj());
        Triad { p, k, x, y, m, mbar }
    }

    pub fn real_frame(&self) -> [Vec3; 3] {
        [self.k, self.x, self.y]
    }

    /// Largest deviation from orthonormality of `{k,x,y}` and from the complex
    /// triad relations under the bilinear metric.
    pub fn orthonormality_residual(&self, metric: &MetricAt) -> f64 {
        let e = self.real_frame();
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((metric.inner(&e[a], &e[b]) - target).abs());
            }
        }
        let kc = crate::geometry::complexify(&self.k);
        let g = &metric.g;
        let checks = [
            bilinear(g, &self.m, &self.m),
            bilinear(g, &self.mbar, &self.mbar),
            bilinear(g, &kc, &self.m),
            bilinear(g, &kc, &self.mbar),
            bilinear(g, &self.m, &self.mbar) - 1.0,
            bilinear(g, &kc, &kc) - 1.0,
        ];
        checks.iter().fold(worst, |w, z| w.max(z.norm()))
    }
}

/// Gauge rotation `m ↦ e^{iθ} m`, i.e. `x, y` rotated by `−θ` in the screen.
pub fn rotate_triad(t: &Triad, theta: f64) -> Triad {
    let (s, c) = theta.sin_cos();
    let x = t.x * c + t.y * s;
    let y = t.y * c - t.x * s;
    Triad::from_real(t.p, t.k, x, y)
}

/// Numerical step sizes for frame and scalar-field derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericConfig {
    /// Step for chart derivatives of the frame fields (covariant derivatives).
    pub frame_step: f64,
    /// Step for frame derivatives `k[f]`, `m[f]` of scalar fields.
    pub deriv_step: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            frame_step: 1e-4,
            deriv_step: 1e-4,
        }
    }
}

impl NumericConfig {
    /// Half-width of the widest nested stencil used by the identity checks.
    pub fn reach(&self, chart: &MetricChart) -> f64 {
        let metric_fd = if chart.has_analytic_partials() {
            0.0
        } else {
            chart.fd_step
        };
        STENCIL_REACH
            * (self.deriv_step
                + self.frame_step.max(chart.curvature_step)
                + metric_fd)
    }
}

/// A smooth frame field built from a unit vector field with a fixed seed axis
/// and an optional gauge rotation.
#[derive(Clone)]
pub struct FrameField<'a> {
    pub chart: &'a MetricChart,
    pub field: &'a VectorFieldSpec,
    pub seed_axis: usize,
    pub config: NumericConfig,
    rotation: Option<GaugeFn>,
}

fn choose_seed(metric: &MetricAt, k: &Vec3, u: &[f64; 3]) -> Result<usize> {
    let limit = seed_cos_limit();
    for a in 0..3 {
        let e = Vec3::ith(a, 1.0);
        let cos = metric.inner(&e, k) / metric.norm(&e);
        if cos.abs() < limit {
            return Ok(a);
        }
    }
    Err(Error::FrameSeedDegenerate(*u))
}

impl<'a> FrameField<'a> {
    /// Locks the seed axis at `anchor`.
    pub fn new(chart: &'a MetricChart, field: &'a VectorFieldSpec, anchor: &[f64; 3]) -> Result<Self> {
        let metric = chart.metric_at(anchor)?;
        let k = field.eval(&metric, anchor)?;
        let seed_axis = choose_seed(&metric, &k, anchor)?;
        Ok(Self {
            chart,
            field,
            seed_axis,
            config: NumericConfig::default(),
            rotation: None,
        })
    }

    pub fn with_config(mut self, config: NumericConfig) -> Self {
        self.config = config;
        self
    }

    /// Constant gauge rotation by `theta`.
    pub fn rotated(&self, theta: f64) -> Self {
        self.with_gauge(Arc::new(move |_| theta))
    }

    /// Point-dependent gauge rotation `m₁ = e^{iθ(p)} m`.
    pub fn with_gauge(&self, gauge: GaugeFn) -> Self {
        let mut out = self.clone();
        out.rotation = Some(gauge);
        out
    }

    pub fn frame(&self, u: &[f64; 3]) -> Result<Triad> {
        let metric = self.chart.metric_at(u)?;
        self.frame_with(&metric, u)
    }

    fn frame_with(&self, metric: &MetricAt, u: &[f64; 3]) -> Result<Triad> {
        let k = self.field.eval(metric, u)?;
        let e = Vec3::ith(self.seed_axis, 1.0);
        let x = e - k * metric.inner(&e, &k);
        let xn = metric.norm(&x);
        if xn < 1e-8 {
            return Err(Error::FrameSeedDegenerate(*u));
        }
        let x = x / xn;
        let y = metric.cross(&k, &x);
        let triad = Triad::from_real(*u, k, x, y);
        Ok(match &self.rotation {
            Some(theta) => rotate_triad(&triad, theta(u)),
            None => triad,
        })
    }

    /// Covariant derivatives of the frame fields at `u`.
    pub fn connection(&self, u: &[f64; 3]) -> Result<Connection> {
        let h = self.config.frame_step;
        self.chart.check_stencil(u, STENCIL_REACH * h)?;
        let metric = self.chart.metric_at(u)?;
        let triad = self.frame_with(&metric, u)?;
        let partials = fd::gradient(
            |q| {
                let t = self.frame(q)?;
                Ok(t.real_frame())
            },
            u,
            h,
        )?;
        let gamma = self.chart.christoffel(u)?;
        let e = triad.real_frame();
        // dframe[b][j] = ∂_j E_b
        let dframe: [[Vec3; 3]; 3] = std::array::from_fn(|b| std::array::from_fn(|j| partials[j][b]));
        let nabla: [[Vec3; 3]; 3] = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut v = gamma.contract(&e[a], &e[b]);
                for j in 0..3 {
                    v += dframe[b][j] * e[a][j];
                }
                v
            })
        });
        let coeff = std::array::from_fn(|a| {
            std::array::from_fn(|b| std::array::from_fn(|c| metric.inner(&nabla[a][b], &e[c])))
        });
        Ok(Connection {
            triad,
            metric,
            nabla,
            dframe,
            coeff,
        })
    }

    pub fn spin_coefficients(&self, u: &[f64; 3]) -> Result<SpinCoefficients> {
        Ok(self.connection(u)?.spin_coefficients())
    }
}

/// Real frame index of `k`, `x`, `y`.
pub const K: usize = 0;
pub const X: usize = 1;
pub const Y: usize = 2;

/// Frame-basis coefficients of `k`, `m`, `m̄` with respect to `{k, x, y}`.
pub fn triad_coefficients() -> [[Complex64; 3]; 3] {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [
        [Complex64::new(1.0, 0.0), z, z],
        [z, s, -I * s],
        [z, s, I * s],
    ]
}

/// Index of `k`, `m`, `m̄` in [`triad_coefficients`].
pub const TK: usize = 0;
pub const TM: usize = 1;
pub const TMB: usize = 2;

/// Frame derivatives at a point: `nabla[a][b] = ∇_{E_a} E_b`,
/// `coeff[a][b][c] = ⟨∇_{E_a} E_b, E_c⟩` and chart partials of the frame.
#[derive(Debug, Clone)]
pub struct Connection {
    pub triad: Triad,
    pub metric: MetricAt,
    pub nabla: [[Vec3; 3]; 3],
    pub dframe: [[Vec3; 3]; 3],
    pub coeff: [[[f64; 3]; 3]; 3],
}

impl Connection {
    /// Complex triad vector `t` (TK, TM, TMB) in chart components.
    pub fn triad_vector(&self, t: usize) -> CVec3 {
        let c = triad_coefficients()[t];
        let e = self.triad.real_frame();
        let mut out = CVec3::zeros();
        for a in 0..3 {
            out += crate::geometry::complexify(&e[a]) * c[a];
        }
        out
    }

    /// `∇_A B` for complex triad vectors `A`, `B` (complex-linear in both slots).
    pub fn nabla_triad(&self, a: usize, b: usize) -> CVec3 {
        let tc = triad_coefficients();
        let mut out = CVec3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let w = tc[a][i] * tc[b][j];
                if w != Complex64::new(0.0, 0.0) {
                    out += crate::geometry::complexify(&self.nabla[i][j]) * w;
                }
            }
        }
        out
    }

    pub fn inner_c(&self, a: &CVec3, b: &CVec3) -> Complex64 {
        bilinear(&self.metric.g, a, b)
    }

    /// Spin coefficients from their defining bilinear inner products.
    pub fn spin_coefficients(&self) -> SpinCoefficients {
        let m = self.triad_vector(TM);
        let mbar = self.triad_vector(TMB);
        let kappa = -self.inner_c(&self.nabla_triad(TK, TK), &m);
        let rho = -self.inner_c(&self.nabla_triad(TMB, TK), &m);
        let sigma = -self.inner_c(&self.nabla_triad(TM, TK), &m);
        let epsilon = self.inner_c(&self.nabla_triad(TK, TM), &mbar);
        let beta = self.inner_c(&self.nabla_triad(TM, TM), &mbar);
        let c = &self.coeff;
        let div = c[X][K][X] + c[Y][K][Y];
        let omega = c[Y][K][X] - c[X][K][Y];
        SpinCoefficients {
            kappa,
            rho,
            sigma,
            epsilon,
            beta,
            div,
            omega,
            shear_mag2: sigma.norm_sqr(),
        }
    }

    /// Complex shear assembled from the real screen matrix.
    pub fn shear_from_screen(&self) -> Complex64 {
        let c = &self.coeff;
        Complex64::new(
            0.5 * (c[Y][K][Y] - c[X][K][X]),
            0.5 * (c[Y][K][X] + c[X][K][Y]),
        )
    }

    /// `ε = i ⟨∇_k x, y⟩`.
    pub fn epsilon_from_frame(&self) -> Complex64 {
        I * self.coeff[K][X][Y]
    }

    /// `max |⟨∇_v k, w⟩ + ⟨v, ∇_w k⟩|` over frame pairs.
    pub fn killing_residual(&self) -> f64 {
        let c = &self.coeff;
        let mut worst = 0.0f64;
        for v in 0..3 {
            for w in 0..3 {
                worst = worst.max((c[v][K][w] + c[w][K][v]).abs());
            }
        }
        worst
    }

    /// Lie bracket `[E_a, E_b]^i = E_a^j ∂_j E_b^i − E_b^j ∂_j E_a^i` from chart partials.
    pub fn bracket(&self, a: usize, b: usize) -> Vec3 {
        let e = self.triad.real_frame();
        let mut out = Vec3::zeros();
        for j in 0..3 {
            out += self.dframe[b][j] * e[a][j] - self.dframe[a][j] * e[b][j];
        }
        out
    }

    /// Complex-bilinear bracket of triad vectors.
    pub fn bracket_triad(&self, a: usize, b: usize) -> CVec3 {
        let tc = triad_coefficients();
        let mut out = CVec3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let w = tc[a][i] * tc[b][j];
                if w != Complex64::new(0.0, 0.0) {
                    out += crate::geometry::complexify(&self.bracket(i, j)) * w;
                }
            }
        }
        out
    }

    /// Frame components `⟨v, E_a⟩` of a complex chart vector.
    pub fn frame_components(&self, v: &CVec3) -> [Complex64; 3] {
        let e = self.triad.real_frame();
        std::array::from_fn(|a| self.inner_c(v, &crate::geometry::complexify(&e[a])))
    }
}

/// The five spin coefficients plus the real kinematic scalars of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinCoefficients {
    #[serde(with = "serde_complex")]
    pub kappa: Complex64,
    #[serde(with = "serde_complex")]
    pub rho: Complex64,
    #[serde(with = "serde_complex")]
    pub sigma: Complex64,
    #[serde(with = "serde_complex")]
    pub epsilon: Complex64,
    #[serde(with = "serde_complex")]
    pub beta: Complex64,
    pub div: f64,
    pub omega: f64,
    pub shear_mag2: f64,
}

impl SpinCoefficients {
    pub fn as_array(&self) -> [Complex64; 5] {
        [self.kappa, self.rho, self.sigma, self.epsilon, self.beta]
    }

    /// `|−2ρ − (div + iω)|`.
    pub fn rho_residual(&self) -> f64 {
        (-2.0 * self.rho - Complex64::new(self.div, self.omega)).norm()
    }
}

/// Flow properties read off the spin coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub geodesic: bool,
    pub divergence_free: bool,
    pub shear_free: bool,
    pub hypersurface_orthogonal: bool,
    pub killing: bool,
}

impl Classification {
    pub fn from_coefficients(sc: &SpinCoefficients, tol: f64) -> Self {
        let geodesic = sc.kappa.norm() < tol;
        let divergence_free = sc.div.abs() < tol;
        let shear_free = sc.sigma.norm() < tol;
        Classification {
            geodesic,
            divergence_free,
            shear_free,
            hypersurface_orthogonal: sc.omega.abs() < tol,
            killing: geodesic && divergence_free && shear_free,
        }
    }
}

/// Default classification tolerance for a chart.
pub fn default_tolerance(chart: &MetricChart) -> f64 {
    if chart.has_analytic_partials() {
        1e-7
    } else {
        1e-4
    }
}

pub fn build_frame(chart: &MetricChart, field: &VectorFieldSpec, u: &[f64; 3]) -> Result<Triad> {
    FrameField::new(chart, field, u)?.frame(u)
}

pub fn spin_coefficients(chart: &MetricChart, field: &VectorFieldSpec, u: &[f64; 3]) -> Result<SpinCoefficients> {
    FrameField::new(chart, field, u)?.spin_coefficients(u)
}

pub fn classify(chart: &MetricChart, field: &VectorFieldSpec, u: &[f64; 3], tol: f64) -> Result<Classification> {
    if !(tol > 0.0) {
        return Err(Error::BadParameter(format!("tolerance must be positive, got {tol}")));
    }
    let sc = spin_coefficients(chart, field, u)?;
    Ok(Classification::from_coefficients(&sc, tol))
}

pub fn killing_residual(chart: &MetricChart, field: &VectorFieldSpec, u: &[f64; 3]) -> Result<f64> {
    Ok(FrameField::new(chart, field, u)?.connection(u)?.killing_residual())
}

/// Spin coefficients recomputed in the gauge `m₁ = e^{iθ} m`.
pub fn rotated_spin_coefficients(
    chart: &MetricChart,
    field: &VectorFieldSpec,
    u: &[f64; 3],
    theta: f64,
) -> Result<(Triad, SpinCoefficients)> {
    let ff = FrameField::new(chart, field, u)?.rotated(theta);
    let conn = ff.connection(u)?;
    Ok((conn.triad.clone(), conn.spin_coefficients()))
}
