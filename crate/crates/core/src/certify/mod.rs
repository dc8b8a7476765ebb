//! Contraction certificates: closed-form rates, the primal-dual saddle
//! certificate, the nonlinear program for the proximal augmented
//! Lagrangian, and numerical verification of the underlying LMIs.

pub mod pal;
pub mod rates;
pub mod saddle;

pub use pal::{
    default_kappa_grid, pal_certify, pal_h, PalCertificate, PalProgramInput, DEFAULT_PAL_DELTA,
};
pub use rates::{
    affine_fb_certificate, fb_gamma_star, fb_rate, pd_certificate, pd_certificate_with_metric,
    pd_metric, proxgrad_gamma_star, proxgrad_rate, PdGains,
};
pub use saddle::{dual_block_bound_check, generalized_saddle_check, saddle_lmi_check};
