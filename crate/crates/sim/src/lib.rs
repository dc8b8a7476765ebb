//! Simulation harness for contracting time-varying optimization dynamics:
//! forward Euler integration, per-time optimum oracles for the two
//! benchmark quadratic programs, experiment reproduction with certificate
//! and tracking-bound validation, and CSV/JSON reporting.

// `!(x > 0)` rejects NaN operands where `x <= 0` would let them through
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// indexed loops mirror the subscripted formulas in the numerical kernels
#![allow(clippy::needless_range_loop)]

pub mod experiment;
pub mod integrate;
pub mod qp;

pub use experiment::{
    run_experiment, summary_json, write_csv, BoundStatus, ExperimentConfig, ExperimentKind,
    ExperimentReport,
};
pub use integrate::{euler_integrate, Trajectory};

/// Errors from the simulation layer.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    /// Bad configuration or mismatched shapes.
    #[error("config: {0}")]
    Config(String),
    /// The integration produced a non-finite state.
    #[error("divergence at step {step}")]
    Divergence { step: usize },
    /// A numerical routine failed.
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] tvopt_core::Error),
}
