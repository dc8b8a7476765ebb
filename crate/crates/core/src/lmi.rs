//! Common-Lyapunov LMI feasibility and bisection for optimal contraction
//! rates.
//!
//! `lmi_feasible` decides whether a single symmetric positive-definite `P`
//! exists with `P D_i + D_i' P + 2 c P <= tol I` for every matrix in the
//! family. One matrix reduces to a Lyapunov solve through the vectorized
//! linear system; several matrices are handled by alternating projections
//! in the space of symmetric matrices. `max_contraction_rate` bisects on
//! `c` over the feasibility oracle.

use crate::linalg::{kron, recompose, sym_eigen, Lu, Matrix};
use crate::metric::{Certificate, Metric, Provenance};
use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Default relative eigenvalue tolerance for LMI feasibility checks.
pub const DEFAULT_LMI_TOL: f64 = 1e-9;
/// Default bisection tolerance on the contraction rate.
pub const DEFAULT_BISECTION_DELTA: f64 = 1e-3;
/// Hard cap on alternating-projection iterations.
pub const PROJECTION_ITERATION_CAP: usize = 50_000;
/// Largest matrix order accepted by the LMI routines.
pub const MAX_LMI_DIM: usize = 50;

/// Outcome of an LMI feasibility query.
#[derive(Debug, Clone)]
pub enum LmiOutcome<T> {
    /// A certified common metric, normalized so `lambda_max(P) = 1`.
    Feasible(Metric<T>),
    /// No metric exists at this rate within the tolerance.
    Infeasible,
    /// The iteration cap was reached (or progress stalled) without a
    /// verdict; distinct from infeasibility.
    Undecided,
}

impl<T> LmiOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LmiOutcome::Feasible(_))
    }
}

fn validate_family<T: Real>(mats: &[Matrix<T>]) -> Result<usize> {
    if mats.is_empty() {
        return Err(Error::Argument("matrix family is empty".into()));
    }
    let n = mats[0].rows();
    if n > MAX_LMI_DIM {
        return Err(Error::Dimension(format!(
            "matrix order {n} exceeds the supported maximum {MAX_LMI_DIM}"
        )));
    }
    for m in mats {
        if !m.is_square() || m.rows() != n {
            return Err(Error::Dimension(
                "all matrices in the family must be square with equal order".into(),
            ));
        }
        if !m.is_finite() {
            return Err(Error::Argument(
                "matrix family has non-finite entries".into(),
            ));
        }
    }
    Ok(n)
}

/// Searches for a common metric certifying rate `c` for the family.
///
/// The returned metric satisfies `P = P' > 0`,
/// `lambda_min(P) >= tol * lambda_max(P)`, and
/// `P D_i + D_i' P + 2 c P <= tol I` for every `D_i`, re-checked by an
/// independent eigensolve before returning.
pub fn lmi_feasible<T: Real>(mats: &[Matrix<T>], c: T, tol: T) -> Result<LmiOutcome<T>> {
    lmi_feasible_from(mats, c, tol, None)
}

/// Same as [`lmi_feasible`] but optionally warm-started from a previous
/// metric weight (used by the bisection).
pub fn lmi_feasible_from<T: Real>(
    mats: &[Matrix<T>],
    c: T,
    tol: T,
    start: Option<&Matrix<T>>,
) -> Result<LmiOutcome<T>> {
    let n = validate_family(mats)?;
    if tol <= T::zero() {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    if !c.is_finite() {
        return Err(Error::Argument("rate must be finite".into()));
    }
    let shifted: Vec<Matrix<T>> = mats.iter().map(|d| d.shift_diag(c)).collect();
    if mats.len() == 1 {
        lyapunov_feasibility(&shifted[0], tol)
    } else {
        alternating_projections(&shifted, tol, start, n)
    }
}

/// Single-matrix route: solve `(D + cI)' P + P (D + cI) = -I` via the
/// vectorized linear system and test positivity of the solution.
fn lyapunov_feasibility<T: Real>(dt: &Matrix<T>, tol: T) -> Result<LmiOutcome<T>> {
    let n = dt.rows();
    let op = lyapunov_operator(dt);
    let lu = match Lu::factor(&op) {
        Ok(lu) => lu,
        // operator singular: an eigenvalue pair of D + cI sums to zero, so
        // the rate sits exactly on the stability boundary
        Err(Error::Singular(_)) => return Ok(LmiOutcome::Infeasible),
        Err(e) => return Err(e),
    };
    let mut rhs = vec![T::zero(); n * n];
    for i in 0..n {
        rhs[i * n + i] = -T::one();
    }
    let vec_p = lu.solve(&rhs)?;
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = vec_p[i * n + j];
        }
    }
    let p = p.symmetric_part();
    finish_if_valid(&p, std::slice::from_ref(dt), tol)
}

/// `vec(D' P + P D)` as a linear operator on `vec(P)` (row-major vec).
fn lyapunov_operator<T: Real>(dt: &Matrix<T>) -> Matrix<T> {
    let n = dt.rows();
    let id = Matrix::identity(n);
    // row-major: vec(A X B) = (A (x) B') vec(X)
    let a = kron(&dt.transpose(), &id); // vec(D' P)
    let b = kron(&id, &dt.transpose()); // vec(P D)
    a.add(&b)
}

/// Validates `P` against the PD floor and every LMI constraint; normalizes
/// and wraps it on success.
fn finish_if_valid<T: Real>(p: &Matrix<T>, shifted: &[Matrix<T>], tol: T) -> Result<LmiOutcome<T>> {
    if !p.is_finite() {
        return Ok(LmiOutcome::Infeasible);
    }
    let eig = sym_eigen(p)?;
    let lmax = *eig.values.last().expect("empty matrix");
    let lmin = *eig.values.first().expect("empty matrix");
    if !(lmax > T::zero()) || lmin < tol * lmax {
        return Ok(LmiOutcome::Infeasible);
    }
    let pn = p.scale(T::one() / lmax);
    for dt in shifted {
        let r = pn.matmul(dt);
        let resid = r.add(&r.transpose());
        let top = *sym_eigen(&resid)?.values.last().expect("empty matrix");
        if top > tol {
            return Ok(LmiOutcome::Infeasible);
        }
    }
    Ok(LmiOutcome::Feasible(Metric::new(pn)?))
}

/// Multi-matrix route: alternate between the positive-definite cone (with a
/// relative floor) and each constraint set
/// `{P : (D+cI)' P + P (D+cI) <= 0}`, reached by projecting the constraint
/// residual onto the negative-semidefinite cone and solving the Lyapunov
/// correction for `P`.
fn alternating_projections<T: Real>(
    shifted: &[Matrix<T>],
    tol: T,
    start: Option<&Matrix<T>>,
    n: usize,
) -> Result<LmiOutcome<T>> {
    let mut factors = Vec::with_capacity(shifted.len());
    for dt in shifted {
        match Lu::factor(&lyapunov_operator(dt)) {
            Ok(lu) => factors.push(lu),
            // cannot project onto this constraint; no verdict
            Err(Error::Singular(_)) => return Ok(LmiOutcome::Undecided),
            Err(e) => return Err(e),
        }
    }
    let two = cast::<T>(2.0);
    let mut p = match start {
        Some(p0) if p0.rows() == n => p0.symmetric_part(),
        _ => Matrix::identity(n),
    };
    let mut best_violation = T::infinity();
    let mut last_improved = 0usize;
    const STALL_WINDOW: usize = 3_000;

    for iter in 0..PROJECTION_ITERATION_CAP {
        // project onto the conditioned PD cone and renormalize
        let eig = sym_eigen(&p)?;
        let lmax = eig.values.last().copied().unwrap_or(T::zero());
        if !(lmax > T::zero()) || !lmax.is_finite() {
            p = Matrix::identity(n);
            continue;
        }
        let floor = two * tol * lmax;
        if eig.values[0] < floor {
            let clipped: Vec<T> = eig.values.iter().map(|&w| w.max(floor)).collect();
            p = recompose(&eig, &clipped);
        }
        // clipping only raises small eigenvalues, so lmax still normalizes
        p = p.scale(T::one() / lmax);

        // constraint projections
        let mut worst = T::zero();
        for (dt, lu) in shifted.iter().zip(&factors) {
            let r0 = p.matmul(dt);
            let resid = r0.add(&r0.transpose());
            let reig = sym_eigen(&resid)?;
            let top = *reig.values.last().expect("empty matrix");
            worst = worst.max(top);
            if top > tol {
                let clipped: Vec<T> = reig.values.iter().map(|&w| w.min(T::zero())).collect();
                let target = recompose(&reig, &clipped);
                let diff = target.sub(&resid);
                let correction = lu.solve(diff.data())?;
                let mut dp = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        dp[(i, j)] = correction[i * n + j];
                    }
                }
                p = p.add(&dp.symmetric_part());
            }
        }

        if worst <= tol {
            // all constraints met; final PD check under the same eigensolve
            let eig = sym_eigen(&p)?;
            let lmax = *eig.values.last().expect("empty matrix");
            if lmax > T::zero() && eig.values[0] >= tol * lmax {
                return finish_if_valid(&p, shifted, tol);
            }
        }

        if worst < best_violation * cast::<T>(0.999) {
            best_violation = worst;
            last_improved = iter;
        } else if iter - last_improved > STALL_WINDOW {
            return Ok(LmiOutcome::Undecided);
        }
    }
    Ok(LmiOutcome::Undecided)
}

/// Result of the contraction-rate bisection.
#[derive(Debug, Clone)]
pub struct ContractionEstimate<T> {
    /// Last certified feasible rate with its metric.
    pub certificate: Certificate<T>,
    /// True when some bisection step returned no verdict; the reported rate
    /// is then conservative.
    pub undecided: bool,
}

/// Bisects the contraction rate over `lmi_feasible`, returning the largest
/// certified `c` within `delta` and its metric.
///
/// `c_hi` defaults to `1.1 * min_i(-spectral_abscissa(D_i))` clipped below
/// at zero; the common-Lyapunov rate never exceeds any individual spectral
/// abscissa.
pub fn max_contraction_rate<T: Real>(
    mats: &[Matrix<T>],
    c_hi: Option<T>,
    delta: T,
) -> Result<ContractionEstimate<T>> {
    validate_family(mats)?;
    if delta <= T::zero() {
        return Err(Error::Argument(
            "bisection tolerance must be positive".into(),
        ));
    }
    let tol = cast::<T>(DEFAULT_LMI_TOL);
    let hi = match c_hi {
        Some(h) => {
            if !(h > T::zero()) {
                return Err(Error::Argument("c_hi must be positive".into()));
            }
            h
        }
        None => {
            let mut bound = T::infinity();
            for d in mats {
                bound = bound.min(-crate::linalg::spectral_abscissa(d)?);
            }
            (cast::<T>(1.1) * bound).max(T::zero())
        }
    };

    let mut undecided = false;
    // done immediately if the upper endpoint is already feasible
    if hi > T::zero() {
        match lmi_feasible(mats, hi, tol)? {
            LmiOutcome::Feasible(m) => {
                return Ok(ContractionEstimate {
                    certificate: Certificate::new(m, hi, Provenance::LmiBisection)?,
                    undecided: false,
                });
            }
            LmiOutcome::Undecided => undecided = true,
            LmiOutcome::Infeasible => {}
        }
    }

    let mut lo = T::zero();
    let mut best = match lmi_feasible(mats, T::zero(), tol)? {
        LmiOutcome::Feasible(m) => m,
        _ => {
            return Err(Error::Numerical(
                "no common metric found even at rate zero".into(),
            ))
        }
    };
    let mut hi = hi.max(T::zero());
    while hi - lo > delta {
        let mid = (hi + lo) * cast::<T>(0.5);
        match lmi_feasible_from(mats, mid, tol, Some(best.weight()))? {
            LmiOutcome::Feasible(m) => {
                lo = mid;
                best = m;
            }
            LmiOutcome::Infeasible => hi = mid,
            LmiOutcome::Undecided => {
                undecided = true;
                hi = mid;
            }
        }
    }
    Ok(ContractionEstimate {
        certificate: Certificate::new(best, lo, Provenance::LmiBisection)?,
        undecided,
    })
}
