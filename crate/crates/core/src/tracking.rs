//! Equilibrium-tracking error bounds for parameter-varying contracting
//! dynamics.
//!
//! For a field contracting at rate `c` and Lipschitz in the parameter with
//! constant `lip_u`, the frozen-parameter equilibrium map is Lipschitz with
//! constant `lip_u / c`, and the tracking error obeys
//!
//! ```text
//! |x(t) - x*(u(t))| <= e^{-c t} e0
//!                      + (lip_u / c) int_0^t e^{-c (t - s)} |u_dot(s)| ds
//! ```
//!
//! evaluated here by trapezoidal quadrature on the caller's time grid.

use std::sync::Arc;

use crate::metric::{condition_number, Metric};
use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Inputs to the Gronwall tracking bound.
#[derive(Clone)]
pub struct TrackingBoundInput<T> {
    pub c: T,
    pub lip_u: T,
    pub e0: T,
    udot_norm: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Real> TrackingBoundInput<T> {
    pub fn new(
        c: T,
        lip_u: T,
        e0: T,
        udot_norm: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::Domain(format!(
                "contraction rate must be positive, got {c}"
            )));
        }
        if lip_u < T::zero() || e0 < T::zero() {
            return Err(Error::Argument(
                "lip_u and the initial error must be nonnegative".into(),
            ));
        }
        Ok(TrackingBoundInput {
            c,
            lip_u,
            e0,
            udot_norm: Arc::new(udot_norm),
        })
    }

    pub fn udot_norm(&self, t: T) -> T {
        (self.udot_norm)(t)
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for TrackingBoundInput<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrackingBoundInput")
            .field("c", &self.c)
            .field("lip_u", &self.lip_u)
            .field("e0", &self.e0)
            .finish()
    }
}

/// Lipschitz constant of the frozen-parameter equilibrium map: `lip_u / c`.
/// Weak contraction (`c <= 0`) certifies nothing.
pub fn equilibrium_map_lipschitz<T: Real>(c: T, lip_u: T) -> Result<T> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!(
            "equilibrium map requires strong contraction, got c = {c}"
        )));
    }
    if lip_u < T::zero() {
        return Err(Error::Argument("lip_u must be nonnegative".into()));
    }
    Ok(lip_u / c)
}

/// Tracking-error bound series on the grid:
/// `e^{-c t} e0 + (lip_u / c) int_0^t e^{-c (t - s)} |u_dot(s)| ds` with the
/// integral accumulated by the trapezoidal rule interval by interval.
pub fn gronwall_bound<T: Real>(inp: &TrackingBoundInput<T>, t_grid: &[T]) -> Result<Vec<T>> {
    if t_grid.is_empty() {
        return Err(Error::Argument("time grid is empty".into()));
    }
    if t_grid[0] != T::zero() {
        return Err(Error::Argument("time grid must start at zero".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument(
            "time grid must be strictly increasing".into(),
        ));
    }
    let half = cast::<T>(0.5);
    let mut out = Vec::with_capacity(t_grid.len());
    let mut integral = T::zero();
    let mut g_prev = eval_udot(inp, t_grid[0])?;
    out.push(inp.e0 + inp.lip_u / inp.c * integral);
    for w in t_grid.windows(2) {
        let h = w[1] - w[0];
        let decay = (-inp.c * h).exp();
        let g_next = eval_udot(inp, w[1])?;
        integral = decay * integral + half * h * (decay * g_prev + g_next);
        g_prev = g_next;
        out.push((-inp.c * w[1]).exp() * inp.e0 + inp.lip_u / inp.c * integral);
    }
    Ok(out)
}

fn eval_udot<T: Real>(inp: &TrackingBoundInput<T>, t: T) -> Result<T> {
    let g = inp.udot_norm(t);
    if g < T::zero() || !g.is_finite() {
        return Err(Error::Argument(format!(
            "|u_dot| must be finite and nonnegative, got {g} at t = {t}"
        )));
    }
    Ok(g)
}

/// Asymptotic tracking bound `(lip_u / c^2) * limsup |u_dot|`.
pub fn asymptotic_bound<T: Real>(c: T, lip_u: T, udot_limsup: T) -> Result<T> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!(
            "asymptotic bound requires strong contraction, got c = {c}"
        )));
    }
    Ok(lip_u / (c * c) * udot_limsup)
}

/// Parameter-Lipschitz constant of the forward-backward field:
/// `Lip_theta(prox) + gamma Lip_theta(F)`.
pub fn lip_theta_fb<T: Real>(lip_theta_prox: T, lip_theta_f: T, gamma: T) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::Domain("gamma must be positive".into()));
    }
    Ok(lip_theta_prox + gamma * lip_theta_f)
}

/// Parameter-Lipschitz constant of the primal-dual field, measured from the
/// Euclidean parameter space into the `P`-weighted state space:
/// `sqrt(chi(P) (Lip_theta(grad f)^2 + Lip_theta(b)^2))`.
pub fn lip_theta_pd<T: Real>(lip_theta_gradf: T, lip_theta_b: T, metric: &Metric<T>) -> T {
    let chi = condition_number(metric);
    (chi * (lip_theta_gradf * lip_theta_gradf + lip_theta_b * lip_theta_b)).sqrt()
}

/// Parameter-Lipschitz constant of the augmented-Lagrangian field:
/// `sqrt(chi(P) (Lip_theta(grad f)^2 + (a_max/gamma^2 + 1) Lip_theta(prox)^2))`.
pub fn lip_theta_pal<T: Real>(
    lip_theta_gradf: T,
    lip_theta_prox: T,
    gamma: T,
    a_max: T,
    metric: &Metric<T>,
) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::Domain("gamma must be positive".into()));
    }
    let chi = condition_number(metric);
    let weight = a_max / (gamma * gamma) + T::one();
    Ok(
        (chi * (lip_theta_gradf * lip_theta_gradf + weight * lip_theta_prox * lip_theta_prox))
            .sqrt(),
    )
}
