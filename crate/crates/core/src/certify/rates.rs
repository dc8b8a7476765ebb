//! Closed-form contraction rates for the forward-backward transcriptions
//! and the primal-dual certificate for equality-constrained problems.

use crate::linalg::{sym_eigenvalues, Matrix};
use crate::metric::{Certificate, Metric, Provenance};
use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Contraction rate of the forward-backward splitting dynamics for a
/// strongly monotone, Lipschitz operator:
/// `1 - sqrt(1 - 2 gamma m + gamma^2 ell^2)` on `0 < gamma < 2 m / ell^2`.
/// The rate is maximized at `gamma* = m / ell^2`.
pub fn fb_rate<T: Real>(m: T, ell: T, gamma: T) -> Result<T> {
    if !(m > T::zero()) || !(ell > T::zero()) || m > ell {
        return Err(Error::Domain(format!(
            "need 0 < m <= ell, got m = {m}, ell = {ell}"
        )));
    }
    let hi = cast::<T>(2.0) * m / (ell * ell);
    if !(gamma > T::zero()) || gamma >= hi {
        return Err(Error::Domain(format!(
            "gamma = {gamma} outside the valid range (0, {hi})"
        )));
    }
    let arg = T::one() - cast::<T>(2.0) * gamma * m + gamma * gamma * ell * ell;
    Ok(T::one() - arg.max(T::zero()).sqrt())
}

/// Optimal step for [`fb_rate`].
pub fn fb_gamma_star<T: Real>(m: T, ell: T) -> T {
    m / (ell * ell)
}

/// Contraction rate of the proximal gradient dynamics (operator is a
/// gradient): `1 - max(|1 - gamma m|, |1 - gamma ell|)` on
/// `0 < gamma < 2 / ell`, maximized at `gamma* = 2 / (m + ell)`.
pub fn proxgrad_rate<T: Real>(m: T, ell: T, gamma: T) -> Result<T> {
    if !(m > T::zero()) || !(ell > T::zero()) || m > ell {
        return Err(Error::Domain(format!(
            "need 0 < m <= ell, got m = {m}, ell = {ell}"
        )));
    }
    let hi = cast::<T>(2.0) / ell;
    if !(gamma > T::zero()) || gamma >= hi {
        return Err(Error::Domain(format!(
            "gamma = {gamma} outside the valid range (0, {hi})"
        )));
    }
    let a = (T::one() - gamma * m).abs();
    let b = (T::one() - gamma * ell).abs();
    Ok(T::one() - a.max(b))
}

/// Optimal step for [`proxgrad_rate`].
pub fn proxgrad_gamma_star<T: Real>(m: T, ell: T) -> T {
    cast::<T>(2.0) / (m + ell)
}

/// Certificate for the forward-backward dynamics with affine operator
/// `F(x) = A x + b`, `A = A' > 0`: for `gamma > 1 / lambda_min(A)` the
/// dynamics contract at rate 1 in the norm weighted by `gamma A - I`.
pub fn affine_fb_certificate<T: Real>(a: &Matrix<T>, gamma: T) -> Result<Certificate<T>> {
    if !a.is_square() {
        return Err(Error::Dimension("operator matrix must be square".into()));
    }
    if a.max_asymmetry() > cast::<T>(1e-10) {
        return Err(Error::Argument("operator matrix must be symmetric".into()));
    }
    let vals = sym_eigenvalues(a)?;
    let lmin = *vals.first().expect("empty matrix");
    if !(lmin > T::zero()) {
        return Err(Error::Argument(
            "operator matrix must be positive definite".into(),
        ));
    }
    if !(gamma > T::one() / lmin) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} must exceed 1/lambda_min(A) = {}",
            T::one() / lmin
        )));
    }
    let p = a.scale(gamma).shift_diag(-T::one());
    let metric = Metric::new(p)?;
    Certificate::new(metric, T::one(), Provenance::ClosedFormTheorem)
}

/// The `(alpha, c)` pair certifying contraction of the primal-dual flow:
/// `alpha = (1/3) min(1/ell, rho/a_max)` and
/// `c = (5/18) min(a_min/ell, (a_min/a_max) rho)`.
#[derive(Debug, Clone, Copy)]
pub struct PdGains<T> {
    pub alpha: T,
    pub c: T,
}

/// Closed-form primal-dual contraction gains.
pub fn pd_certificate<T: Real>(rho: T, ell: T, a_min: T, a_max: T) -> Result<PdGains<T>> {
    if !(rho > T::zero()) || !(ell > T::zero()) || rho > ell {
        return Err(Error::Domain(format!(
            "need 0 < rho <= ell, got rho = {rho}, ell = {ell}"
        )));
    }
    if !(a_min > T::zero()) || !(a_max >= a_min) {
        return Err(Error::Domain(format!(
            "need 0 < a_min <= a_max, got a_min = {a_min}, a_max = {a_max}"
        )));
    }
    let third = T::one() / cast::<T>(3.0);
    let alpha = third * (T::one() / ell).min(rho / a_max);
    let c = cast::<T>(5.0) / cast::<T>(18.0) * (a_min / ell).min(a_min / a_max * rho);
    Ok(PdGains { alpha, c })
}

/// Assembles the metric `P = [[I, alpha A'], [alpha A, I]]` for the gains.
pub fn pd_metric<T: Real>(gains: &PdGains<T>, a: &Matrix<T>) -> Result<Metric<T>> {
    let n = a.cols();
    let m = a.rows();
    let p = Matrix::from_blocks(
        &Matrix::identity(n),
        &a.transpose().scale(gains.alpha),
        &a.scale(gains.alpha),
        &Matrix::identity(m),
    );
    Metric::new(p)
}

/// Primal-dual certificate with the metric built from `A`.
pub fn pd_certificate_with_metric<T: Real>(
    rho: T,
    ell: T,
    a_min: T,
    a_max: T,
    a: &Matrix<T>,
) -> Result<Certificate<T>> {
    let gains = pd_certificate(rho, ell, a_min, a_max)?;
    let metric = pd_metric(&gains, a)?;
    Certificate::new(metric, gains.c, Provenance::ClosedFormTheorem)
}
