//! Proximal operators, projections, and Moreau envelopes.
//!
//! [`ProxFamily`] packages a parameterized proximal operator together with
//! its Lipschitz-in-parameter metadata. The parameter vector `theta` feeds
//! whatever part of the family is parameter-dependent (the halfspace bound,
//! the affine-set right-hand side); families that ignore it accept any
//! `theta`.

use crate::linalg::{solve, sym_eigenvalues, Matrix};
use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Extended-real value; `+inf` is explicit rather than a sentinel float so
/// it can never leak into arithmetic unnoticed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    PosInf,
}

impl<T: Real> ExtReal<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }
}

/// Membership slack when evaluating indicator functions at computed
/// projections, which land on their set only up to rounding.
const INDICATOR_SLACK: f64 = 1e-8;

/// Which family a proximal operator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxKind {
    AffineSet,
    Halfspace,
    Box,
    L1,
    Zero,
}

/// A parameterized proximal operator with Lipschitz-in-theta metadata.
#[derive(Debug, Clone)]
pub enum ProxFamily<T> {
    /// `g = 0`; the prox is the identity.
    Zero { dim: usize },
    /// `g = weight * |.|_1`; soft thresholding at `gamma * weight`.
    L1 { dim: usize, weight: T },
    /// Indicator of the box `[lower, upper]` componentwise.
    Box { lower: Vec<T>, upper: Vec<T> },
    /// Indicator of the scalar halfspace `{ z <= theta_0 }`.
    Halfspace,
    /// Indicator of `{ z : A z = theta }` for full-row-rank `A`.
    AffineSet { a: Matrix<T> },
}

impl<T: Real> ProxFamily<T> {
    pub fn l1(dim: usize, weight: T) -> Result<Self> {
        if !(weight > T::zero()) {
            return Err(Error::Argument("l1 weight must be positive".into()));
        }
        Ok(ProxFamily::L1 { dim, weight })
    }

    pub fn boxed(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::Argument(
                "box bounds must satisfy lower <= upper".into(),
            ));
        }
        Ok(ProxFamily::Box { lower, upper })
    }

    /// Validates full row rank of `A` (via `A A'` positive definiteness).
    pub fn affine_set(a: Matrix<T>) -> Result<Self> {
        let aat = a.matmul(&a.transpose());
        let vals = sym_eigenvalues(&aat)?;
        let lmin = *vals.first().expect("empty constraint matrix");
        let lmax = *vals.last().expect("empty constraint matrix");
        if lmin <= lmax * cast::<T>(1e-12) || lmin <= T::zero() {
            return Err(Error::Singular(
                "affine-set constraint matrix is rank deficient".into(),
            ));
        }
        Ok(ProxFamily::AffineSet { a })
    }

    pub fn kind(&self) -> ProxKind {
        match self {
            ProxFamily::Zero { .. } => ProxKind::Zero,
            ProxFamily::L1 { .. } => ProxKind::L1,
            ProxFamily::Box { .. } => ProxKind::Box,
            ProxFamily::Halfspace => ProxKind::Halfspace,
            ProxFamily::AffineSet { .. } => ProxKind::AffineSet,
        }
    }

    /// Whether `g` is an indicator function (prox = projection).
    pub fn is_indicator(&self) -> bool {
        matches!(
            self.kind(),
            ProxKind::AffineSet | ProxKind::Halfspace | ProxKind::Box
        )
    }

    pub fn dim(&self) -> usize {
        match self {
            ProxFamily::Zero { dim } => *dim,
            ProxFamily::L1 { dim, .. } => *dim,
            ProxFamily::Box { lower, .. } => lower.len(),
            ProxFamily::Halfspace => 1,
            ProxFamily::AffineSet { a } => a.cols(),
        }
    }

    /// Evaluates `prox_{gamma g_theta}(z)`.
    pub fn evaluate(&self, z: &[T], gamma: T, theta: &[T]) -> Result<Vec<T>> {
        if z.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "prox input length {} does not match family dimension {}",
                z.len(),
                self.dim()
            )));
        }
        if !(gamma > T::zero()) {
            return Err(Error::Argument("gamma must be positive".into()));
        }
        match self {
            ProxFamily::Zero { .. } => Ok(z.to_vec()),
            ProxFamily::L1 { weight, .. } => prox_l1(z, gamma, *weight),
            ProxFamily::Box { lower, upper } => Ok(z
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&l, &u))| v.max(l).min(u))
                .collect()),
            ProxFamily::Halfspace => {
                let bound = theta
                    .first()
                    .copied()
                    .ok_or_else(|| Error::Argument("halfspace family needs theta[0]".into()))?;
                Ok(vec![prox_halfspace(z[0], bound)])
            }
            ProxFamily::AffineSet { a } => {
                if theta.len() != a.rows() {
                    return Err(Error::Dimension(format!(
                        "affine-set theta length {} does not match row count {}",
                        theta.len(),
                        a.rows()
                    )));
                }
                prox_affine_set(z, a, theta)
            }
        }
    }

    /// Declared Lipschitz constant of `theta -> prox_{gamma g_theta}(x)`,
    /// uniform in `x`. Validated by sampling in the test suite rather than
    /// derived symbolically.
    pub fn lip_theta(&self) -> T {
        match self {
            ProxFamily::Zero { .. } | ProxFamily::L1 { .. } | ProxFamily::Box { .. } => T::zero(),
            // projection onto a moving halfspace moves at most as fast as
            // the bound
            ProxFamily::Halfspace => T::one(),
            ProxFamily::AffineSet { a } => {
                // d prox / d theta = A' (A A')^{-1}, largest singular value
                // 1 / sigma_min(A)
                let aat = a.matmul(&a.transpose());
                let vals = sym_eigenvalues(&aat).expect("validated at construction");
                T::one() / vals.first().copied().expect("nonempty").sqrt()
            }
        }
    }

    /// `g_theta` evaluated exactly, with `+inf` explicit. Indicator
    /// membership uses a small slack scaled to the point so projections
    /// computed in floating point count as members.
    pub fn g_value(&self, point: &[T], theta: &[T]) -> ExtReal<T> {
        let slack = cast::<T>(INDICATOR_SLACK);
        match self {
            ProxFamily::Zero { .. } => ExtReal::Finite(T::zero()),
            ProxFamily::L1 { weight, .. } => {
                ExtReal::Finite(point.iter().fold(T::zero(), |acc, &v| acc + v.abs()) * *weight)
            }
            ProxFamily::Box { lower, upper } => {
                let inside = point
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(&v, (&l, &u))| v >= l - slack && v <= u + slack);
                if inside {
                    ExtReal::Finite(T::zero())
                } else {
                    ExtReal::PosInf
                }
            }
            ProxFamily::Halfspace => {
                let bound = theta[0];
                if point[0] <= bound + slack * (T::one() + bound.abs()) {
                    ExtReal::Finite(T::zero())
                } else {
                    ExtReal::PosInf
                }
            }
            ProxFamily::AffineSet { a } => {
                let r = a.matvec(point);
                let scale = T::one() + theta.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
                let ok = r
                    .iter()
                    .zip(theta)
                    .all(|(&ri, &ti)| (ri - ti).abs() <= slack * scale);
                if ok {
                    ExtReal::Finite(T::zero())
                } else {
                    ExtReal::PosInf
                }
            }
        }
    }
}

/// Projection onto `{ u : A u = b }`:
/// `z - A' (A A')^{-1} (A z - b)`.
pub fn prox_affine_set<T: Real>(z: &[T], a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    if a.cols() != z.len() || a.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "projection dimensions: A is {}x{}, z has {}, b has {}",
            a.rows(),
            a.cols(),
            z.len(),
            b.len()
        )));
    }
    let aat = a.matmul(&a.transpose());
    let mut rhs = a.matvec(z);
    for (r, &bi) in rhs.iter_mut().zip(b) {
        *r -= bi;
    }
    let nu = solve(&aat, &rhs)
        .map_err(|_| Error::Singular("A A' is singular; A must have full row rank".into()))?;
    let corr = a.tr_matvec(&nu);
    Ok(z.iter().zip(&corr).map(|(&zi, &ci)| zi - ci).collect())
}

/// Projection onto the scalar halfspace `{ z <= bound }`.
pub fn prox_halfspace<T: Real>(z: T, bound: T) -> T {
    z.min(bound)
}

/// Componentwise soft threshold `sign(z) max(|z| - gamma weight, 0)`.
pub fn prox_l1<T: Real>(z: &[T], gamma: T, weight: T) -> Result<Vec<T>> {
    if !(gamma > T::zero()) || !(weight > T::zero()) {
        return Err(Error::Argument("gamma and weight must be positive".into()));
    }
    let t = gamma * weight;
    Ok(z.iter()
        .map(|&v| {
            let shrunk = (v.abs() - t).max(T::zero());
            if v >= T::zero() {
                shrunk
            } else {
                -shrunk
            }
        })
        .collect())
}

/// Gradient of the Moreau envelope: `(z - prox_{gamma g_theta}(z)) / gamma`.
pub fn moreau_gradient<T: Real>(
    z: &[T],
    fam: &ProxFamily<T>,
    gamma: T,
    theta: &[T],
) -> Result<Vec<T>> {
    let p = fam.evaluate(z, gamma, theta)?;
    Ok(z.iter()
        .zip(&p)
        .map(|(&zi, &pi)| (zi - pi) / gamma)
        .collect())
}

/// Moreau envelope value `g(p) + |z - p|^2 / (2 gamma)` at `p = prox(z)`.
///
/// `g_value` must be finite at the prox point; an infinite value means the
/// prox landed outside the domain of `g`, which violates the family's
/// contract.
pub fn moreau_value<T: Real>(
    z: &[T],
    fam: &ProxFamily<T>,
    gamma: T,
    theta: &[T],
    g_value: impl Fn(&[T]) -> ExtReal<T>,
) -> Result<T> {
    let p = fam.evaluate(z, gamma, theta)?;
    let g = match g_value(&p) {
        ExtReal::Finite(v) => v,
        ExtReal::PosInf => {
            return Err(Error::Invariant(
                "g is +inf at the prox point; prox must land in dom(g)".into(),
            ))
        }
    };
    let sq = z
        .iter()
        .zip(&p)
        .map(|(&zi, &pi)| (zi - pi) * (zi - pi))
        .fold(T::zero(), |a, v| a + v);
    Ok(g + sq / (cast::<T>(2.0) * gamma))
}
