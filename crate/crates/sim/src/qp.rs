//! Closed-form optima for the two quadratic programs the experiments track.

use tvopt_core::linalg::{dot, solve, Matrix};
use tvopt_core::scalar::Real;

use crate::SimError;

/// Minimizer and multiplier of `min (1/2)|x - r|^2  s.t. A x = b`:
/// `lambda* = (A A')^{-1} (A r - b)`, `x* = r - A' lambda*`.
pub fn qp_equality_optimum<T: Real>(
    r: &[T],
    a: &Matrix<T>,
    b: &[T],
) -> Result<(Vec<T>, Vec<T>), SimError> {
    if a.cols() != r.len() || a.rows() != b.len() {
        return Err(SimError::Config(format!(
            "shape mismatch: A is {}x{}, r has {}, b has {}",
            a.rows(),
            a.cols(),
            r.len(),
            b.len()
        )));
    }
    let aat = a.matmul(&a.transpose());
    let mut rhs = a.matvec(r);
    for (v, &bi) in rhs.iter_mut().zip(b) {
        *v -= bi;
    }
    let lambda = solve(&aat, &rhs)
        .map_err(|e| SimError::Numerical(format!("singular A A' in equality QP: {e}")))?;
    let at_lambda = a.tr_matvec(&lambda);
    let x = r.iter().zip(&at_lambda).map(|(&ri, &ci)| ri - ci).collect();
    Ok((x, lambda))
}

/// Stationarity and feasibility residual of the equality-constrained QP.
pub fn kkt_residual_equality<T: Real>(r: &[T], a: &Matrix<T>, b: &[T], x: &[T], lambda: &[T]) -> T {
    // stationarity: x - r + A' lambda = 0; feasibility: A x - b = 0
    let at_lambda = a.tr_matvec(lambda);
    let mut worst = T::zero();
    for i in 0..x.len() {
        worst = worst.max((x[i] - r[i] + at_lambda[i]).abs());
    }
    let ax = a.matvec(x);
    for i in 0..b.len() {
        worst = worst.max((ax[i] - b[i]).abs());
    }
    worst
}

/// Minimizer and multiplier of `min (1/2)|x + r|^2  s.t. a' x <= rhs` by
/// active-set logic: the unconstrained optimum `-r` if feasible, otherwise
/// the projection onto the hyperplane with
/// `lambda* = (a'(-r) - rhs) / |a|^2 >= 0`.
pub fn qp_single_inequality_optimum<T: Real>(
    r: &[T],
    a_row: &[T],
    rhs: T,
) -> Result<(Vec<T>, T), SimError> {
    if a_row.len() != r.len() {
        return Err(SimError::Config("a_row and r lengths differ".into()));
    }
    let a_sq = dot(a_row, a_row);
    if !(a_sq > T::zero()) {
        return Err(SimError::Config("constraint row must be nonzero".into()));
    }
    let unconstrained: Vec<T> = r.iter().map(|&ri| -ri).collect();
    let slack = dot(a_row, &unconstrained) - rhs;
    if slack <= T::zero() {
        return Ok((unconstrained, T::zero()));
    }
    let lambda = slack / a_sq;
    let x = unconstrained
        .iter()
        .zip(a_row)
        .map(|(&ui, &ai)| ui - lambda * ai)
        .collect();
    Ok((x, lambda))
}

/// KKT residual (stationarity, primal/dual feasibility, complementarity)
/// for the single-inequality QP.
pub fn kkt_residual_inequality<T: Real>(r: &[T], a_row: &[T], rhs: T, x: &[T], lambda: T) -> T {
    let mut worst = T::zero();
    for i in 0..x.len() {
        worst = worst.max((x[i] + r[i] + lambda * a_row[i]).abs());
    }
    let slack = dot(a_row, x) - rhs;
    worst = worst.max(slack.max(T::zero())); // primal feasibility
    worst = worst.max((-lambda).max(T::zero())); // dual feasibility
    worst = worst.max((lambda * slack).abs()); // complementarity
    worst
}
