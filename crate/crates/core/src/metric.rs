//! Weighted-norm metrics and contraction certificates.
//!
//! A [`Metric`] is a symmetric positive-definite weight matrix `P` defining
//! the norm `|x|_P = sqrt(x' P x)` and the matrix log-norm
//! `mu_P(A) = min { b : P A + A' P <= 2 b P }`. A [`Certificate`] pairs a
//! metric with a contraction rate and remembers how it was obtained.

use crate::linalg::{cholesky, forward_substitute, sym_eigenvalues, Matrix};
use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Maximum absolute asymmetry tolerated when constructing a metric.
pub const METRIC_SYMMETRY_TOL: f64 = 1e-10;

/// Symmetric positive-definite weight matrix defining a weighted l2 norm.
#[derive(Debug, Clone)]
pub struct Metric<T> {
    p: Matrix<T>,
    dim: usize,
    lambda_min: T,
    lambda_max: T,
}

impl<T: Real> Metric<T> {
    /// Validates symmetry (max asymmetry `1e-10`) and positive definiteness.
    pub fn new(p: Matrix<T>) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::Dimension("metric weight must be square".into()));
        }
        if !p.is_finite() {
            return Err(Error::Argument(
                "metric weight has non-finite entries".into(),
            ));
        }
        if p.max_asymmetry() > cast::<T>(METRIC_SYMMETRY_TOL) {
            return Err(Error::Argument(format!(
                "metric weight asymmetry {} exceeds {METRIC_SYMMETRY_TOL}",
                p.max_asymmetry()
            )));
        }
        let sym = p.symmetric_part();
        let vals = sym_eigenvalues(&sym)?;
        let lambda_min = *vals.first().expect("empty metric");
        let lambda_max = *vals.last().expect("empty metric");
        if lambda_min <= T::zero() {
            return Err(Error::Argument(format!(
                "metric weight is not positive definite (lambda_min = {lambda_min})"
            )));
        }
        let dim = sym.rows();
        Ok(Metric {
            p: sym,
            dim,
            lambda_min,
            lambda_max,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Metric {
            p: Matrix::identity(dim),
            dim,
            lambda_min: T::one(),
            lambda_max: T::one(),
        }
    }

    pub fn weight(&self) -> &Matrix<T> {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda_min(&self) -> T {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> T {
        self.lambda_max
    }

    /// Rescales the weight so its largest eigenvalue is one.
    pub fn normalized(&self) -> Metric<T> {
        let s = T::one() / self.lambda_max;
        Metric {
            p: self.p.scale(s),
            dim: self.dim,
            lambda_min: self.lambda_min * s,
            lambda_max: T::one(),
        }
    }

    /// `|x|_P = sqrt(x' P x)`.
    pub fn norm(&self, x: &[T]) -> Result<T> {
        weighted_norm(x, self)
    }
}

/// Weighted norm `sqrt(x' P x)`.
pub fn weighted_norm<T: Real>(x: &[T], m: &Metric<T>) -> Result<T> {
    if x.len() != m.dim {
        return Err(Error::Dimension(format!(
            "vector length {} does not match metric dimension {}",
            x.len(),
            m.dim
        )));
    }
    let px = m.p.matvec(x);
    let q = crate::linalg::dot(x, &px);
    // tiny negative values can appear from rounding
    Ok(q.max(T::zero()).sqrt())
}

/// Log-norm of `A` in the metric `P`: the smallest `b` with
/// `P A + A' P <= 2 b P`, i.e. half the largest eigenvalue of the pencil
/// `(P A + A' P, P)` reduced by the Cholesky factor of `P`.
pub fn lognorm<T: Real>(a: &Matrix<T>, m: &Metric<T>) -> Result<T> {
    if !a.is_square() || a.rows() != m.dim {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but metric dimension is {}",
            a.rows(),
            a.cols(),
            m.dim
        )));
    }
    if !a.is_finite() {
        return Err(Error::Argument(
            "log-norm input has non-finite entries".into(),
        ));
    }
    let pa = m.p.matmul(a);
    let s = pa.add(&pa.transpose()); // P A + A' P
    let l = cholesky(&m.p)?;
    // W = L^-1 S L^-T, same eigenvalues as the pencil (S, P)
    let n = m.dim;
    let mut w = Matrix::zeros(n, n);
    // first L^-1 S (column by column), then right-multiply by L^-T
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| s[(i, j)]).collect();
        cols.push(forward_substitute(&l, &col));
    }
    // rows of (L^-1 S) are cols[.][i]; apply forward substitution again on rows
    for i in 0..n {
        let row: Vec<T> = (0..n).map(|j| cols[j][i]).collect();
        let solved = forward_substitute(&l, &row);
        for j in 0..n {
            w[(i, j)] = solved[j];
        }
    }
    let vals = sym_eigenvalues(&w)?;
    Ok(*vals.last().expect("empty matrix") * cast::<T>(0.5))
}

/// Condition number `chi(P) = lambda_max(P) / lambda_min(P) >= 1`.
pub fn condition_number<T: Real>(m: &Metric<T>) -> T {
    m.lambda_max / m.lambda_min
}

/// How a contraction certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// One of the closed-form rate theorems.
    ClosedFormTheorem,
    /// Bisection over common-Lyapunov LMI feasibility.
    LmiBisection,
    /// Bisection on the nonlinear program for the proximal augmented
    /// Lagrangian flow.
    NlpBisection,
}

/// A `(P, c)` pair asserting strong (`c > 0`) or weak (`c = 0`)
/// infinitesimal contraction.
#[derive(Debug, Clone)]
pub struct Certificate<T> {
    pub metric: Metric<T>,
    pub rate: T,
    pub provenance: Provenance,
}

impl<T: Real> Certificate<T> {
    pub fn new(metric: Metric<T>, rate: T, provenance: Provenance) -> Result<Self> {
        if rate < T::zero() || !rate.is_finite() {
            return Err(Error::Argument(format!(
                "contraction rate must be nonnegative, got {rate}"
            )));
        }
        Ok(Certificate {
            metric,
            rate,
            provenance,
        })
    }

    /// Strong contraction means a strictly positive rate.
    pub fn is_strong(&self) -> bool {
        self.rate > T::zero()
    }
}
