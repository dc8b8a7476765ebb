//! Fixed-step forward Euler integration.

use tvopt_core::dynamics::VectorField;
use tvopt_core::scalar::Real;

use crate::SimError;

/// Time grid, state samples, instantaneous-optimum samples, and the error
/// series between them. The integrator fills the grid and states; the
/// experiment pipeline fills optima and errors.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<T> {
    pub t_grid: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub optima: Vec<Vec<T>>,
    pub errors: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    /// Constant step of the grid.
    pub fn dt(&self) -> T {
        self.t_grid[1] - self.t_grid[0]
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// Checks the series invariants: equal lengths for every populated
    /// series and a strictly increasing grid with constant step.
    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.t_grid.len();
        if n < 2 {
            return Err(SimError::Config(
                "trajectory needs at least two samples".into(),
            ));
        }
        if self.states.len() != n
            || (!self.optima.is_empty() && self.optima.len() != n)
            || (!self.errors.is_empty() && self.errors.len() != n)
        {
            return Err(SimError::Config("trajectory series lengths differ".into()));
        }
        let dt = self.dt();
        let tol = dt * T::epsilon() * T::from_usize(64 * n).unwrap();
        for (k, w) in self.t_grid.windows(2).enumerate() {
            if w[1] <= w[0] || ((w[1] - w[0]) - dt).abs() > tol {
                return Err(SimError::Config(format!(
                    "time grid is not uniformly increasing at index {k}"
                )));
            }
        }
        Ok(())
    }
}

/// Forward Euler: `x_{k+1} = x_k + dt f(x_k, k dt)`.
///
/// Deterministic and bit-stable for identical inputs; the grid time is
/// recomputed as `k * dt` each step rather than accumulated. A non-finite
/// state aborts with the offending step index.
pub fn euler_integrate<T: Real>(
    field: &VectorField<T>,
    x0: &[T],
    dt: T,
    t_end: T,
) -> Result<Trajectory<T>, SimError> {
    if !(dt > T::zero()) || !(t_end >= dt) {
        return Err(SimError::Config(format!(
            "need dt > 0 and t_end >= dt, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if x0.len() != field.state_dim() {
        return Err(SimError::Config(format!(
            "initial state has length {}, field expects {}",
            x0.len(),
            field.state_dim()
        )));
    }
    let steps = (t_end / dt)
        .round()
        .to_usize()
        .ok_or_else(|| SimError::Config("step count overflow".into()))?;
    let mut t_grid = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    for k in 0..=steps {
        let t = dt * T::from_usize(k).unwrap();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Divergence { step: k });
        }
        t_grid.push(t);
        states.push(x.clone());
        if k < steps {
            let v = field.eval(&x, t);
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi += dt * *vi;
            }
        }
    }
    Ok(Trajectory {
        t_grid,
        states,
        optima: Vec::new(),
        errors: Vec::new(),
    })
}
