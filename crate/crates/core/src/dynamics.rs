//! The contracting vector fields: forward-backward splitting, primal-dual,
//! and the primal-dual flow on the proximal augmented Lagrangian, each in
//! parameter-varying form, plus equilibrium characterization.

use std::sync::Arc;

use crate::linalg::{norm2, sub_vec, sym_eigenvalues, Matrix};
use crate::monotone::MonotoneMap;
use crate::prox::ProxFamily;
use crate::scalar::Real;
use crate::{Error, Result};

type CurveFn<T> = Arc<dyn Fn(T) -> (Vec<T>, Vec<T>) + Send + Sync>;
type FieldFn<T> = Arc<dyn Fn(&[T], T) -> Vec<T> + Send + Sync>;
type ParamVecFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// A parameter curve `t -> (theta(t), theta_dot(t))`.
///
/// The derivative is supplied exactly by the caller rather than recovered by
/// finite differencing; the tracking bounds consume `|theta_dot|` directly.
#[derive(Clone)]
pub struct ParameterCurve<T> {
    eval: CurveFn<T>,
    dim: usize,
}

impl<T: Real> ParameterCurve<T> {
    pub fn from_fn(
        dim: usize,
        eval: impl Fn(T) -> (Vec<T>, Vec<T>) + Send + Sync + 'static,
    ) -> Self {
        ParameterCurve {
            eval: Arc::new(eval),
            dim,
        }
    }

    /// Frozen parameter: `theta(t) = theta0`, `theta_dot = 0`.
    pub fn constant(theta: Vec<T>) -> Self {
        let dim = theta.len();
        ParameterCurve::from_fn(dim, move |_| (theta.clone(), vec![T::zero(); dim]))
    }

    /// The unit circle traversed at angular speed `omega`:
    /// `theta(t) = (cos(omega t), sin(omega t))`, so `|theta_dot| = omega`.
    pub fn circle(omega: T) -> Self {
        ParameterCurve::from_fn(2, move |t| {
            let (s, c) = (omega * t).sin_cos();
            (vec![c, s], vec![-omega * s, omega * c])
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self, t: T) -> Vec<T> {
        (self.eval)(t).0
    }

    pub fn theta_dot(&self, t: T) -> Vec<T> {
        (self.eval)(t).1
    }

    pub fn sample(&self, t: T) -> (Vec<T>, Vec<T>) {
        (self.eval)(t)
    }
}

impl<T> std::fmt::Debug for ParameterCurve<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParameterCurve")
            .field("dim", &self.dim)
            .finish()
    }
}

/// Which transcription produced a vector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    ForwardBackward,
    Projected,
    ProximalGradient,
    PrimalDual,
    ProximalAugmentedLagrangian,
}

/// A `(state, t) -> velocity` map with contraction metadata.
#[derive(Clone)]
pub struct VectorField<T> {
    eval: FieldFn<T>,
    state_dim: usize,
    kind: FieldKind,
}

impl<T: Real> VectorField<T> {
    pub fn from_fn(
        state_dim: usize,
        kind: FieldKind,
        eval: impl Fn(&[T], T) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            eval: Arc::new(eval),
            state_dim,
            kind,
        }
    }

    pub fn eval(&self, state: &[T], t: T) -> Vec<T> {
        debug_assert_eq!(state.len(), self.state_dim);
        (self.eval)(state, t)
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }
}

impl<T> std::fmt::Debug for VectorField<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField")
            .field("state_dim", &self.state_dim)
            .field("kind", &self.kind)
            .finish()
    }
}

/// Linear constraint block `A x = b(theta)` with the spectral bounds of
/// `A A'` computed at construction.
#[derive(Clone)]
pub struct ConstraintData<T> {
    a: Matrix<T>,
    b: ParamVecFn<T>,
    lip_theta_b: T,
    a_min: T,
    a_max: T,
}

impl<T: Real> ConstraintData<T> {
    pub fn new(
        a: Matrix<T>,
        b: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
        lip_theta_b: T,
    ) -> Result<Self> {
        let aat = a.matmul(&a.transpose());
        let vals = sym_eigenvalues(&aat)?;
        let a_min = *vals.first().expect("empty constraint matrix");
        let a_max = *vals.last().expect("empty constraint matrix");
        if !(a_min > T::zero()) {
            return Err(Error::Argument(format!(
                "A A' must be positive definite (a_min = {a_min})"
            )));
        }
        if lip_theta_b < T::zero() {
            return Err(Error::Argument("lip_theta_b must be nonnegative".into()));
        }
        Ok(ConstraintData {
            a,
            b: Arc::new(b),
            lip_theta_b,
            a_min,
            a_max,
        })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn rhs(&self, theta: &[T]) -> Vec<T> {
        (self.b)(theta)
    }

    pub fn lip_theta_b(&self) -> T {
        self.lip_theta_b
    }

    pub fn a_min(&self) -> T {
        self.a_min
    }

    pub fn a_max(&self) -> T {
        self.a_max
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for ConstraintData<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstraintData")
            .field("a", &self.a)
            .field("a_min", &self.a_min)
            .field("a_max", &self.a_max)
            .finish()
    }
}

/// Problem data shared by the three transcriptions. `operator` is the
/// monotone map `F` (or the gradient of the smooth objective), `prox` the
/// proximal family of the nonsmooth part, and `constraint` the linear block
/// used by the primal-dual flows.
#[derive(Debug, Clone)]
pub struct ProblemData<T> {
    pub operator: MonotoneMap<T>,
    pub prox: ProxFamily<T>,
    pub constraint: Option<ConstraintData<T>>,
    pub gamma: T,
}

impl<T: Real> ProblemData<T> {
    pub fn new(
        operator: MonotoneMap<T>,
        prox: ProxFamily<T>,
        constraint: Option<ConstraintData<T>>,
        gamma: T,
    ) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(Error::Argument("gamma must be positive".into()));
        }
        Ok(ProblemData {
            operator,
            prox,
            constraint,
            gamma,
        })
    }
}

/// Forward-backward velocity at explicit parameter value:
/// `-x + prox_{gamma g_theta}(x - gamma F_theta(x))`.
pub fn fb_velocity<T: Real>(data: &ProblemData<T>, x: &[T], theta: &[T]) -> Result<Vec<T>> {
    let fx = data.operator.evaluate(x, theta);
    let inner: Vec<T> = x
        .iter()
        .zip(&fx)
        .map(|(&xi, &fi)| xi - data.gamma * fi)
        .collect();
    let p = data.prox.evaluate(&inner, data.gamma, theta)?;
    Ok(x.iter().zip(&p).map(|(&xi, &pi)| pi - xi).collect())
}

/// Continuous-time forward-backward splitting dynamics
/// `x_dot = -x + prox_{gamma g_theta(t)}(x - gamma F_theta(t)(x))`.
///
/// With an indicator `g` this is the projected dynamics; with a gradient
/// operator it is the proximal gradient flow.
pub fn fb_field<T: Real>(data: &ProblemData<T>, curve: &ParameterCurve<T>) -> VectorField<T> {
    let kind = if data.prox.is_indicator() {
        FieldKind::Projected
    } else if data.operator.is_gradient() {
        FieldKind::ProximalGradient
    } else {
        FieldKind::ForwardBackward
    };
    let data = data.clone();
    let curve = curve.clone();
    let dim = data.operator.dim();
    VectorField::from_fn(dim, kind, move |x, t| {
        let theta = curve.theta(t);
        fb_velocity(&data, x, &theta).expect("forward-backward field evaluation")
    })
}

/// Primal-dual velocity at explicit parameter value, on `z = (x, lambda)`:
/// `x_dot = -F_theta(x) - A' lambda`, `lambda_dot = A x - b_theta`.
pub fn pd_velocity<T: Real>(data: &ProblemData<T>, z: &[T], theta: &[T]) -> Result<Vec<T>> {
    let con = data
        .constraint
        .as_ref()
        .ok_or_else(|| Error::Argument("primal-dual dynamics need constraint data".into()))?;
    let n = data.operator.dim();
    let m = con.matrix().rows();
    if z.len() != n + m {
        return Err(Error::Dimension(format!(
            "state length {} does not match n + m = {}",
            z.len(),
            n + m
        )));
    }
    let (x, lam) = z.split_at(n);
    let grad = data.operator.evaluate(x, theta);
    let at_lam = con.matrix().tr_matvec(lam);
    let mut out = Vec::with_capacity(n + m);
    for i in 0..n {
        out.push(-grad[i] - at_lam[i]);
    }
    let ax = con.matrix().matvec(x);
    let b = con.rhs(theta);
    for i in 0..m {
        out.push(ax[i] - b[i]);
    }
    Ok(out)
}

/// Arrow-Hurwicz-Uzawa flow for the equality-constrained problem, in
/// parameter-varying form.
pub fn pd_field<T: Real>(
    data: &ProblemData<T>,
    curve: &ParameterCurve<T>,
) -> Result<VectorField<T>> {
    let con = data
        .constraint
        .as_ref()
        .ok_or_else(|| Error::Argument("primal-dual dynamics need constraint data".into()))?;
    let dim = data.operator.dim() + con.matrix().rows();
    let data = data.clone();
    let curve = curve.clone();
    Ok(VectorField::from_fn(
        dim,
        FieldKind::PrimalDual,
        move |z, t| {
            let theta = curve.theta(t);
            pd_velocity(&data, z, &theta).expect("primal-dual field evaluation")
        },
    ))
}

/// Proximal-augmented-Lagrangian velocity at explicit parameter value, on
/// `z = (x, lambda)`:
/// `x_dot = -F_theta(x) - A' grad M_{gamma g_theta}(A x + gamma lambda)`,
/// `lambda_dot = gamma (-lambda + grad M_{gamma g_theta}(A x + gamma lambda))`.
pub fn pal_velocity<T: Real>(data: &ProblemData<T>, z: &[T], theta: &[T]) -> Result<Vec<T>> {
    let con = data.constraint.as_ref().ok_or_else(|| {
        Error::Argument("augmented-Lagrangian dynamics need constraint data".into())
    })?;
    let n = data.operator.dim();
    let m = con.matrix().rows();
    if z.len() != n + m {
        return Err(Error::Dimension(format!(
            "state length {} does not match n + m = {}",
            z.len(),
            n + m
        )));
    }
    let gamma = data.gamma;
    let (x, lam) = z.split_at(n);
    let mut y = con.matrix().matvec(x);
    for (yi, &li) in y.iter_mut().zip(lam) {
        *yi += gamma * li;
    }
    let mg = crate::prox::moreau_gradient(&y, &data.prox, gamma, theta)?;
    let grad = data.operator.evaluate(x, theta);
    let at_mg = con.matrix().tr_matvec(&mg);
    let mut out = Vec::with_capacity(n + m);
    for i in 0..n {
        out.push(-grad[i] - at_mg[i]);
    }
    for i in 0..m {
        out.push(gamma * (mg[i] - lam[i]));
    }
    Ok(out)
}

/// Primal-dual flow on the proximal augmented Lagrangian, in
/// parameter-varying form.
pub fn pal_field<T: Real>(
    data: &ProblemData<T>,
    curve: &ParameterCurve<T>,
) -> Result<VectorField<T>> {
    let con = data.constraint.as_ref().ok_or_else(|| {
        Error::Argument("augmented-Lagrangian dynamics need constraint data".into())
    })?;
    let dim = data.operator.dim() + con.matrix().rows();
    let data = data.clone();
    let curve = curve.clone();
    Ok(VectorField::from_fn(
        dim,
        FieldKind::ProximalAugmentedLagrangian,
        move |z, t| {
            let theta = curve.theta(t);
            pal_velocity(&data, z, &theta).expect("augmented-Lagrangian field evaluation")
        },
    ))
}

/// Fixed-point residual `|x - prox_{gamma g_theta}(x - gamma F_theta(x))|_2`;
/// zero exactly at solutions of the monotone inclusion.
pub fn fb_equilibrium_residual<T: Real>(x: &[T], data: &ProblemData<T>, theta: &[T]) -> Result<T> {
    let v = fb_velocity(data, x, theta)?;
    Ok(norm2(&v))
}

/// Largest velocity jump over consecutive points of a straight-line sweep;
/// used to spot discontinuities in field evaluations.
pub fn max_segment_jump<T: Real>(
    field: &VectorField<T>,
    from: &[T],
    to: &[T],
    steps: usize,
    t: T,
) -> T {
    let mut worst = T::zero();
    let mut prev: Option<Vec<T>> = None;
    for k in 0..=steps {
        let frac = T::from_usize(k).unwrap() / T::from_usize(steps).unwrap();
        let x: Vec<T> = from
            .iter()
            .zip(to)
            .map(|(&a, &b)| a + frac * (b - a))
            .collect();
        let v = field.eval(&x, t);
        if let Some(p) = prev {
            worst = worst.max(norm2(&sub_vec(&v, &p)));
        }
        prev = Some(v);
    }
    worst
}
