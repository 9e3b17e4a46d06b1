use nalgebra::Matrix3;
use num_complex::Complex64;

use super::chart::{MetricChart, Vec3};
use super::CVec3;
use crate::error::Result;
use crate::fd::{self, Linear, STENCIL_REACH};

/// Christoffel symbols of the second kind; `self.0[k][(i, j)] = Γ^k_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [Matrix3<f64>; 3]);

impl Christoffel {
    /// `Γ^k_ij = ½ g^{kl} (∂_i g_lj + ∂_j g_li − ∂_l g_ij)`.
    pub fn from_metric(g_inv: &Matrix3<f64>, dg: &[Matrix3<f64>; 3]) -> Self {
        let mut lowered = [Matrix3::zeros(); 3];
        for (l, low) in lowered.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    low[(i, j)] = 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
            }
        }
        let mut out = [Matrix3::zeros(); 3];
        for (k, gk) in out.iter_mut().enumerate() {
            for l in 0..3 {
                *gk += lowered[l] * g_inv[(k, l)];
            }
        }
        Christoffel(out)
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][(i, j)]
    }

    /// `Γ^k_ij v^i w^j`.
    pub fn contract(&self, v: &Vec3, w: &Vec3) -> Vec3 {
        Vec3::from_fn(|k, _| (self.0[k] * w).dot(v))
    }
}

impl Linear for Christoffel {
    fn add(&self, o: &Self) -> Self {
        Christoffel(self.0.add(&o.0))
    }
    fn sub(&self, o: &Self) -> Self {
        Christoffel(self.0.sub(&o.0))
    }
    fn scale(&self, s: f64) -> Self {
        Christoffel(self.0.scale(s))
    }
}

/// Fully lowered Riemann tensor,
/// `R(u,v,w,z) = ⟨∇_u ∇_v w − ∇_v ∇_u w − ∇_[u,v] w, z⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Riemann(pub [[[[f64; 3]; 3]; 3]; 3]);

impl Riemann {
    pub fn eval(&self, a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        acc += self.0[i][j][k][l] * a[i] * b[j] * c[k] * d[l];
                    }
                }
            }
        }
        acc
    }

    /// Complex-multilinear evaluation on complex slot vectors.
    pub fn eval_c(&self, a: &CVec3, b: &CVec3, c: &CVec3, d: &CVec3) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let ab = a[i] * b[j];
                for k in 0..3 {
                    let abc = ab * c[k];
                    for l in 0..3 {
                        acc += abc * d[l] * self.0[i][j][k][l];
                    }
                }
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Largest violation of the pair symmetries and the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let r = &self.0;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = r[i][j][k][l];
                        worst = worst
                            .max((v + r[j][i][k][l]).abs())
                            .max((v + r[i][j][l][k]).abs())
                            .max((v - r[k][l][i][j]).abs())
                            .max((v + r[j][k][i][l] + r[k][i][j][l]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Chart-basis curvature at a point.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureData {
    pub gamma: Christoffel,
    pub riem: Riemann,
    pub ric: Matrix3<f64>,
    pub scalar: f64,
}

impl MetricChart {
    /// Riemann, Ricci and scalar curvature. `∂Γ` is obtained by five-point
    /// differencing of the Christoffel symbols with `curvature_step`.
    pub fn curvature(&self, u: &[f64; 3]) -> Result<CurvatureData> {
        let m = self.metric_at(u)?;
        let gamma = self.christoffel(u)?;
        let h = self.curvature_step;
        let reach = STENCIL_REACH * h
            + if self.has_analytic_partials() {
                0.0
            } else {
                STENCIL_REACH * self.fd_step
            };
        self.check_stencil(u, reach)?;
        let dgamma = fd::gradient(|q| self.christoffel(q), u, h)?;

        // Q^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
        let mut riem = [[[[0.0; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut q = [0.0; 3];
                    for (l, ql) in q.iter_mut().enumerate() {
                        let mut acc = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                        for mm in 0..3 {
                            acc += gamma.get(l, i, mm) * gamma.get(mm, j, k)
                                - gamma.get(l, j, mm) * gamma.get(mm, i, k);
                        }
                        *ql = acc;
                    }
                    for l in 0..3 {
                        riem[i][j][k][l] = (0..3).map(|mm| m.g[(l, mm)] * q[mm]).sum();
                    }
                }
            }
        }

        // Ric_jk = g^{il} R_ijkl
        let mut ric = Matrix3::zeros();
        for j in 0..3 {
            for k in 0..3 {
                let mut acc = 0.0;
                for i in 0..3 {
                    for l in 0..3 {
                        acc += m.g_inv[(i, l)] * riem[i][j][k][l];
                    }
                }
                ric[(j, k)] = acc;
            }
        }
        let scalar = (m.g_inv.component_mul(&ric)).sum();
        fd::ensure_finite("curvature", &[scalar])?;
        Ok(CurvatureData {
            gamma,
            riem: Riemann(riem),
            ric,
            scalar,
        })
    }
}
