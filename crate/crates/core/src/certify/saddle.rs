//! Numerical LMI checks for saddle and generalized saddle matrices.
//!
//! These validate, by eigensolve, that the closed-form primal-dual
//! certificate and the program-based augmented-Lagrangian certificate
//! actually satisfy their contraction LMIs on concrete matrix triples.

use super::pal::PalCertificate;
use crate::linalg::{sym_eigenvalues, Matrix};
use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Relative slack for the saddle LMI check.
const SADDLE_TOL: f64 = 1e-9;
/// Relative slack for the generalized saddle LMI check.
const GENERALIZED_TOL: f64 = 1e-8;

fn block_metric<T: Real>(a: &Matrix<T>, alpha: T) -> Matrix<T> {
    Matrix::from_blocks(
        &Matrix::identity(a.cols()),
        &a.transpose().scale(alpha),
        &a.scale(alpha),
        &Matrix::identity(a.rows()),
    )
}

/// Whether `S' P + P S + 2 c P <= tol * max(1, |S' P + P S|_F) I`.
fn lmi_holds<T: Real>(s: &Matrix<T>, p: &Matrix<T>, c: T, tol: T) -> Result<bool> {
    let sp = p.matmul(s);
    let mut q = sp.add(&sp.transpose());
    q = q.add(&p.scale(cast::<T>(2.0) * c));
    let scale = q.frobenius_norm().max(T::one());
    let top = *sym_eigenvalues(&q)?.last().expect("empty matrix");
    Ok(top <= tol * scale)
}

/// Saddle-matrix contraction check: builds
/// `S = [[-B, -A'], [A, 0]]` and `P = [[I, alpha A'], [alpha A, I]]` and
/// tests `S' P + P S + 2 c P <= 1e-9 I` by eigensolve.
pub fn saddle_lmi_check<T: Real>(b: &Matrix<T>, a: &Matrix<T>, alpha: T, c: T) -> Result<bool> {
    if !b.is_square() || b.rows() != a.cols() {
        return Err(Error::Dimension(format!(
            "B is {}x{} but A has {} columns",
            b.rows(),
            b.cols(),
            a.cols()
        )));
    }
    if b.max_asymmetry() > cast::<T>(1e-9) {
        return Err(Error::Argument("B must be symmetric".into()));
    }
    let m = a.rows();
    let s = Matrix::from_blocks(
        &b.scale(-T::one()),
        &a.transpose().scale(-T::one()),
        a,
        &Matrix::zeros(m, m),
    );
    let p = block_metric(a, alpha);
    lmi_holds(&s, &p, c, cast::<T>(SADDLE_TOL))
}

/// Generalized saddle-matrix check for the augmented-Lagrangian flow:
/// builds
/// `S = [[-B - A' G A / gamma, -A' G], [G A, -gamma (I - G)]]`
/// and tests `S' P + P S + 2 c* P <= 1e-8 I` with the certificate's metric.
pub fn generalized_saddle_check<T: Real>(
    b: &Matrix<T>,
    a: &Matrix<T>,
    g: &Matrix<T>,
    gamma: T,
    cert: &PalCertificate<T>,
) -> Result<bool> {
    let n = a.cols();
    let m = a.rows();
    if !b.is_square() || b.rows() != n {
        return Err(Error::Dimension("B must be n x n".into()));
    }
    if !g.is_square() || g.rows() != m {
        return Err(Error::Dimension("G must be m x m".into()));
    }
    if !(gamma > T::zero()) {
        return Err(Error::Argument("gamma must be positive".into()));
    }
    let ga = g.matmul(a);
    let at_ga = a.transpose().matmul(&ga);
    let top_left = b.add(&at_ga.scale(T::one() / gamma)).scale(-T::one());
    let top_right = a.transpose().matmul(g).scale(-T::one());
    let bottom_right = Matrix::identity(m).sub(g).scale(-gamma);
    let s = Matrix::from_blocks(&top_left, &top_right, &ga, &bottom_right);
    let p = block_metric(a, cert.alpha_star);
    lmi_holds(&s, &p, cert.c_star, cast::<T>(GENERALIZED_TOL))
}

/// Lower bound used for the dual block of generalized saddle matrices:
/// for diagonal `D` with entries in `[0, 1]`, `0 <= X <= x_max I`, and
/// `alpha <= gamma / x_max`, checks
/// `alpha (D X + X D) + 2 gamma (I - D) >= (3/2) alpha X` by eigensolve.
pub fn dual_block_bound_check<T: Real>(
    x: &Matrix<T>,
    d_diag: &[T],
    gamma: T,
    alpha: T,
) -> Result<bool> {
    let m = x.rows();
    if !x.is_square() || d_diag.len() != m {
        return Err(Error::Dimension(
            "X square and diag length must match".into(),
        ));
    }
    let d = Matrix::diagonal(d_diag);
    let dx = d.matmul(x);
    let lhs = dx
        .add(&dx.transpose())
        .scale(alpha)
        .add(&Matrix::identity(m).sub(&d).scale(cast::<T>(2.0) * gamma));
    let gap = lhs.sub(&x.scale(cast::<T>(1.5) * alpha));
    let scale = gap.frobenius_norm().max(T::one());
    let bottom = *sym_eigenvalues(&gap)?.first().expect("empty matrix");
    Ok(bottom >= -cast::<T>(SADDLE_TOL) * scale)
}
