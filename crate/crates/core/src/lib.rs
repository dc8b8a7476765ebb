//! Contracting continuous-time dynamics for convex optimization.
//!
//! This crate implements three transcriptions of canonical strongly convex
//! problems into strongly infinitesimally contracting dynamics — forward-
//! backward splitting for monotone inclusions, the Arrow-Hurwicz-Uzawa flow
//! for linear equality constraints, and the primal-dual flow on the
//! proximal augmented Lagrangian for composite minimization — together with
//! the machinery to certify their contraction rates (closed-form theorems,
//! common-Lyapunov LMI bisection, and a nonlinear-program certificate) and
//! to bound the tracking error against the instantaneous optimizer when the
//! problem data drifts in time.
//!
//! All numerics are generic over the scalar type via [`scalar::Real`]
//! (f32 or f64); the `*64` aliases at the crate root fix f64 for everyday
//! use.

// `!(x > 0)` rejects NaN operands where `x <= 0` would let them through
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// indexed loops mirror the subscripted formulas in the numerical kernels
#![allow(clippy::needless_range_loop)]

pub mod certify;
pub mod dynamics;
pub mod linalg;
pub mod lmi;
pub mod metric;
pub mod monotone;
pub mod prox;
pub mod rng;
pub mod scalar;
pub mod tracking;

pub use scalar::Real;

/// Errors shared by the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Mismatched shapes or unsupported sizes.
    #[error("dimension: {0}")]
    Dimension(String),
    /// Invalid argument values (non-finite entries, bad tolerances, ...).
    #[error("argument: {0}")]
    Argument(String),
    /// A matrix was singular or rank deficient where that is not allowed.
    #[error("singular: {0}")]
    Singular(String),
    /// Input outside the domain of a closed-form formula.
    #[error("domain: {0}")]
    Domain(String),
    /// An iteration failed to produce a usable result.
    #[error("numerical: {0}")]
    Numerical(String),
    /// A documented invariant was violated at runtime.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

// Concrete f64 aliases for the main domain types.
pub type Matrix64 = linalg::Matrix<f64>;
pub type Metric64 = metric::Metric<f64>;
pub type Certificate64 = metric::Certificate<f64>;
pub type VectorField64 = dynamics::VectorField<f64>;
pub type ProblemData64 = dynamics::ProblemData<f64>;
pub type ParameterCurve64 = dynamics::ParameterCurve<f64>;
pub type ProxFamily64 = prox::ProxFamily<f64>;
pub type MonotoneMap64 = monotone::MonotoneMap<f64>;
pub type PalCertificate64 = certify::PalCertificate<f64>;
pub type PalProgramInput64 = certify::PalProgramInput<f64>;
