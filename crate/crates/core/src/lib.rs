//! Newman-Penrose formalism on Riemannian 3-manifolds.
//!
//! The crate computes the spin coefficients `κ, ρ, σ, ε, β` of a unit vector
//! field in a complex triad `{k, m, m̄}`, verifies the structural identities
//! that tie them to curvature (covariant-derivative and bracket tables, the
//! Ricci-triad relations, the five Sachs equations and two differential
//! Bianchi identities), and checks the flow results that follow from them on a
//! catalog of closed-form model manifolds.
//!
//! Curvature convention: `R(u,v,w,z) = ⟨∇_u∇_v w − ∇_v∇_u w − ∇_[u,v] w, z⟩`
//! and `Ric(v,w) = Σ_a R(E_a, v, w, E_a)`, so the unit round sphere has
//! scalar curvature `+6`.

pub mod catalog;
pub mod error;
pub mod fd;
pub mod flow;
pub mod geometry;
pub mod sampling;
pub mod serde_complex;
pub mod triad;
pub mod verify;

pub use catalog::{CatalogEntry, CatalogParams, FieldEntry};
pub use error::{Error, Result};
pub use geometry::{geodesic_integrate, ChartPoint, CurvatureData, MetricChart, Vec3};
pub use triad::{
    build_frame, classify, killing_residual, rotate_triad, spin_coefficients, Classification, FrameField,
    NumericConfig, SpinCoefficients, Triad, VectorFieldSpec,
};
pub use verify::{ResidualReport, TriadCurvature};
