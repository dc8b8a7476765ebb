//! Strongly monotone operators with declared constants.

use std::sync::Arc;

use crate::linalg::{lognorm_euclidean, spectral_norm, Matrix};
use crate::scalar::Real;
use crate::{Error, Result};

type EvalFn<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;

/// A map `(x, theta) -> F_theta(x)`, strongly monotone in `x` with
/// parameter `m`, Lipschitz in `x` with constant `ell >= m`, and Lipschitz
/// in `theta` with constant `lip_theta`. The constants are declared
/// metadata; the test suite validates them by sampling.
#[derive(Clone)]
pub struct MonotoneMap<T> {
    eval: EvalFn<T>,
    dim: usize,
    strong_monotonicity: T,
    lipschitz: T,
    lip_theta: T,
    is_gradient: bool,
}

impl<T: Real> MonotoneMap<T> {
    pub fn from_fn(
        dim: usize,
        strong_monotonicity: T,
        lipschitz: T,
        lip_theta: T,
        eval: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(
            dim,
            strong_monotonicity,
            lipschitz,
            lip_theta,
            false,
            Arc::new(eval),
        )
    }

    /// Marks the map as a gradient `F = grad f`; the strong-monotonicity
    /// parameter is then the strong-convexity constant of `f`.
    pub fn gradient_from_fn(
        dim: usize,
        strong_convexity: T,
        smoothness: T,
        lip_theta: T,
        eval: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(
            dim,
            strong_convexity,
            smoothness,
            lip_theta,
            true,
            Arc::new(eval),
        )
    }

    /// Affine map `x -> M x + b` with constants computed from `M`.
    pub fn affine(m: Matrix<T>, b: Vec<T>) -> Result<Self> {
        if !m.is_square() || m.rows() != b.len() {
            return Err(Error::Dimension("affine operator shape mismatch".into()));
        }
        let dim = m.rows();
        // strong monotonicity = smallest eigenvalue of the symmetric part
        let mono = -lognorm_euclidean(&m.scale(-T::one()))?;
        let lip = spectral_norm(&m)?;
        let is_gradient = m.max_asymmetry() < T::epsilon().sqrt();
        Self::build(
            dim,
            mono,
            lip,
            T::zero(),
            is_gradient,
            Arc::new(move |x: &[T], _theta: &[T]| {
                let mut v = m.matvec(x);
                for (vi, &bi) in v.iter_mut().zip(&b) {
                    *vi += bi;
                }
                v
            }),
        )
    }

    fn build(
        dim: usize,
        m: T,
        ell: T,
        lip_theta: T,
        is_gradient: bool,
        eval: EvalFn<T>,
    ) -> Result<Self> {
        if !(m > T::zero()) || !(ell > T::zero()) {
            return Err(Error::Argument(
                "strong monotonicity and Lipschitz constants must be positive".into(),
            ));
        }
        if m > ell {
            return Err(Error::Argument(format!(
                "strong monotonicity {m} exceeds Lipschitz constant {ell}"
            )));
        }
        if lip_theta < T::zero() {
            return Err(Error::Argument("lip_theta must be nonnegative".into()));
        }
        Ok(MonotoneMap {
            eval,
            dim,
            strong_monotonicity: m,
            lipschitz: ell,
            lip_theta,
            is_gradient,
        })
    }

    pub fn evaluate(&self, x: &[T], theta: &[T]) -> Vec<T> {
        (self.eval)(x, theta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strong_monotonicity(&self) -> T {
        self.strong_monotonicity
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn lip_theta(&self) -> T {
        self.lip_theta
    }

    pub fn is_gradient(&self) -> bool {
        self.is_gradient
    }
}

impl<T> std::fmt::Debug for MonotoneMap<T>
where
    T: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("dim", &self.dim)
            .field("m", &self.strong_monotonicity)
            .field("ell", &self.lipschitz)
            .field("lip_theta", &self.lip_theta)
            .field("is_gradient", &self.is_gradient)
            .finish()
    }
}
