//! Contraction certificates for the proximal-augmented-Lagrangian flow.
//!
//! The certificate comes from a nonlinear program over `(c, alpha, kappa)`:
//! maximize `c` subject to
//!
//! ```text
//!   alpha <= min(1/sqrt(a_max) - eps, gamma/a_max)
//!   kappa >= 2/3
//!   c     <= (3/4 - 1/(2 kappa)) alpha a_min
//!   h(c, alpha, kappa) >= 0
//! ```
//!
//! with `h` affine in `alpha` on each side of the ReLU kink at
//! `alpha = 1/gamma`. For fixed `(c, kappa)` the feasible `alpha` set is an
//! interval computed in closed form, so feasibility needs no LP solver;
//! the optimum is found by a grid over `kappa` and bisection on `c`.

use crate::linalg::Matrix;
use crate::metric::Metric;
use crate::scalar::{cast, Real};
use crate::{Error, Result};

/// Default number of grid points for `kappa`.
pub const DEFAULT_KAPPA_GRID_LEN: usize = 32;
/// Default bisection tolerance on `c`.
pub const DEFAULT_PAL_DELTA: f64 = 1e-4;

/// Inputs to the certificate program.
#[derive(Debug, Clone)]
pub struct PalProgramInput<T> {
    pub rho: T,
    pub ell: T,
    pub a_min: T,
    pub a_max: T,
    pub gamma: T,
    pub epsilon: T,
    pub kappa_grid: Vec<T>,
    pub delta: T,
}

impl<T: Real> PalProgramInput<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rho: T,
        ell: T,
        a_min: T,
        a_max: T,
        gamma: T,
        epsilon: T,
        kappa_grid: Vec<T>,
        delta: T,
    ) -> Result<Self> {
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
        if !(gamma > T::zero()) {
            return Err(Error::Domain("gamma must be positive".into()));
        }
        let eps_cap = T::one() / a_max.sqrt();
        if !(epsilon > T::zero()) || epsilon >= eps_cap {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, {eps_cap}), got {epsilon}"
            )));
        }
        let two_thirds = cast::<T>(2.0) / cast::<T>(3.0);
        if kappa_grid.is_empty() || kappa_grid.iter().any(|&k| k < two_thirds) {
            return Err(Error::Domain(
                "kappa grid must be nonempty with every value >= 2/3".into(),
            ));
        }
        if !(delta > T::zero()) {
            return Err(Error::Domain("delta must be positive".into()));
        }
        let mut kappa_grid = kappa_grid;
        kappa_grid.sort_by(|a, b| a.partial_cmp(b).expect("NaN kappa"));
        Ok(PalProgramInput {
            rho,
            ell,
            a_min,
            a_max,
            gamma,
            epsilon,
            kappa_grid,
            delta,
        })
    }

    /// Defaults: `epsilon = 1e-3 / sqrt(a_max)`, 32 log-spaced `kappa`
    /// values in `[2/3 + 1e-3, 100]`, bisection tolerance `1e-4`.
    pub fn with_defaults(rho: T, ell: T, a_min: T, a_max: T, gamma: T) -> Result<Self> {
        if !(a_max > T::zero()) {
            return Err(Error::Domain("a_max must be positive".into()));
        }
        let epsilon = cast::<T>(1e-3) / a_max.sqrt();
        Self::new(
            rho,
            ell,
            a_min,
            a_max,
            gamma,
            epsilon,
            default_kappa_grid(),
            cast::<T>(DEFAULT_PAL_DELTA),
        )
    }

    fn alpha_max(&self) -> T {
        (T::one() / self.a_max.sqrt() - self.epsilon).min(self.gamma / self.a_max)
    }
}

/// Log-spaced grid on `[2/3 + 1e-3, 100]`.
pub fn default_kappa_grid<T: Real>() -> Vec<T> {
    let lo: f64 = 2.0 / 3.0 + 1e-3;
    let hi: f64 = 100.0;
    let n = DEFAULT_KAPPA_GRID_LEN;
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            cast::<T>((lo.ln() + f * (hi.ln() - lo.ln())).exp())
        })
        .collect()
}

/// The nonlinear constraint function of the certificate program.
pub fn pal_h<T: Real>(input: &PalProgramInput<T>, c: T, alpha: T, kappa: T) -> T {
    let two = cast::<T>(2.0);
    let ratio = input.a_max / input.a_min;
    let s = input.ell + input.a_max / input.gamma + two * c;
    let bracket = input.gamma * input.gamma * ratio + s * s + two * input.gamma * ratio * s;
    let relu = (two * alpha - two / input.gamma).max(T::zero());
    two * input.rho - relu * input.a_max - two * c - alpha * kappa * ratio * bracket
}

/// Feasible `alpha` interval for the one-unknown feasibility subproblem at
/// fixed `(c, kappa)`, or `None` when empty. Closed form: the rate
/// constraint lower-bounds `alpha`, and `h >= 0` upper-bounds it on each
/// affine piece of the ReLU.
fn alpha_interval_closed_form<T: Real>(
    input: &PalProgramInput<T>,
    c: T,
    kappa: T,
) -> Option<(T, T)> {
    let two = cast::<T>(2.0);
    let alpha_max = input.alpha_max();
    if alpha_max < T::zero() {
        return None;
    }
    let coef = (cast::<T>(0.75) - T::one() / (two * kappa)) * input.a_min;
    let alpha_lo = if coef > T::zero() {
        c / coef
    } else if c > T::zero() {
        return None;
    } else {
        T::zero()
    };
    if alpha_lo > alpha_max {
        return None;
    }
    let ratio = input.a_max / input.a_min;
    let s = input.ell + input.a_max / input.gamma + two * c;
    let bracket = input.gamma * input.gamma * ratio + s * s + two * input.gamma * ratio * s;
    let slope = kappa * ratio * bracket; // h decreases in alpha at this rate (plus the ReLU term)
    let kink = T::one() / input.gamma;
    let base = two * input.rho - two * c;

    let mut alpha_hi = -T::one();
    // piece alpha <= 1/gamma: h = base - slope * alpha
    let hi1 = if slope > T::zero() {
        base / slope
    } else {
        T::infinity()
    };
    if hi1 >= T::zero() {
        alpha_hi = alpha_hi.max(hi1.min(kink).min(alpha_max));
    }
    // piece alpha >= 1/gamma: h = base + (2/gamma) a_max - (2 a_max + slope) alpha
    let hi2 = (base + two / input.gamma * input.a_max) / (two * input.a_max + slope);
    if hi2 >= kink {
        alpha_hi = alpha_hi.max(hi2.min(alpha_max));
    }
    if alpha_hi < alpha_lo {
        return None;
    }
    Some((alpha_lo, alpha_hi))
}

/// Fallback feasibility by direct scan of `alpha` at fixed resolution;
/// only used if the affine-structure verification fails.
fn alpha_interval_by_scan<T: Real>(input: &PalProgramInput<T>, c: T, kappa: T) -> Option<(T, T)> {
    let alpha_max = input.alpha_max();
    if alpha_max < T::zero() {
        return None;
    }
    let step = cast::<T>(1e-6);
    let two = cast::<T>(2.0);
    let coef = (cast::<T>(0.75) - T::one() / (two * kappa)) * input.a_min;
    let mut lo: Option<T> = None;
    let mut hi: Option<T> = None;
    let mut alpha = T::zero();
    while alpha <= alpha_max {
        let rate_ok = c <= coef * alpha;
        let h_ok = pal_h(input, c, alpha, kappa) >= T::zero();
        if rate_ok && h_ok {
            if lo.is_none() {
                lo = Some(alpha);
            }
            hi = Some(alpha);
        }
        alpha += step;
    }
    match (lo, hi) {
        (Some(l), Some(h)) => Some((l, h)),
        _ => None,
    }
}

/// Checks that `h` is affine in `alpha` on each side of the ReLU kink by
/// second differences at representative points.
fn verify_affine_structure<T: Real>(input: &PalProgramInput<T>) -> bool {
    let kappa = input.kappa_grid[0];
    let probes = [T::zero(), input.rho * cast::<T>(0.5)];
    let kink = T::one() / input.gamma;
    for &c in &probes {
        for &(a0, a1, a2) in &[
            (
                kink * cast::<T>(0.1),
                kink * cast::<T>(0.3),
                kink * cast::<T>(0.5),
            ),
            (
                kink * cast::<T>(1.5),
                kink * cast::<T>(2.0),
                kink * cast::<T>(2.5),
            ),
        ] {
            let h0 = pal_h(input, c, a0, kappa);
            let h1 = pal_h(input, c, a1, kappa);
            let h2 = pal_h(input, c, a2, kappa);
            let second = h0 - cast::<T>(2.0) * h1 + h2;
            let scale = h0.abs().max(h1.abs()).max(h2.abs()).max(T::one());
            if second.abs() > cast::<T>(1e-9) * scale {
                return false;
            }
        }
    }
    true
}

/// Certificate produced by the program: optimal `(c*, alpha*, kappa*)` and
/// the metric `P = [[I, alpha* A'], [alpha* A, I]]`.
#[derive(Debug, Clone)]
pub struct PalCertificate<T> {
    pub c_star: T,
    pub alpha_star: T,
    pub kappa_star: T,
    pub metric: Metric<T>,
    /// True when no grid point gave `c > 0`; the certificate then only
    /// asserts weak contraction with `c* = alpha* = 0`.
    pub weakly_contracting: bool,
}

/// Solves the certificate program for the given constraint matrix.
///
/// For each `kappa` on the grid the rate is bisected to tolerance `delta`
/// (checking the closed-form `alpha` interval at each step); the best rate
/// across the grid wins, with ties broken toward the smallest `kappa`.
pub fn pal_certify<T: Real>(
    input: &PalProgramInput<T>,
    a: &Matrix<T>,
) -> Result<PalCertificate<T>> {
    let aat = a.matmul(&a.transpose());
    let vals = crate::linalg::sym_eigenvalues(&aat)?;
    let slack = cast::<T>(1e-9) * input.a_max;
    if *vals.first().expect("empty constraint matrix") < input.a_min - slack
        || *vals.last().expect("empty constraint matrix") > input.a_max + slack
    {
        return Err(Error::Argument(format!(
            "A A' spectrum [{}, {}] violates the declared bounds [{}, {}]",
            vals.first().unwrap(),
            vals.last().unwrap(),
            input.a_min,
            input.a_max
        )));
    }

    let closed_form_ok = verify_affine_structure(input);
    let interval = |c: T, kappa: T| -> Option<(T, T)> {
        if closed_form_ok {
            alpha_interval_closed_form(input, c, kappa)
        } else {
            alpha_interval_by_scan(input, c, kappa)
        }
    };

    let two = cast::<T>(2.0);
    let mut best: Option<(T, T, T)> = None; // (c, alpha, kappa)
    for &kappa in &input.kappa_grid {
        let coef = (cast::<T>(0.75) - T::one() / (two * kappa)) * input.a_min;
        let c_max = input.rho.min(coef * input.alpha_max());
        if !(c_max > T::zero()) {
            continue;
        }
        let (c_k, iv_k) = if let Some(iv) = interval(c_max, kappa) {
            // feasible at the cap: done for this kappa
            (c_max, iv)
        } else {
            let mut lo = T::zero();
            let mut hi = c_max;
            let mut iv_lo = match interval(T::zero(), kappa) {
                Some(iv) => iv,
                // c = 0 is always feasible with alpha = 0; failure here
                // means the structure probe misfired
                None => continue,
            };
            while hi - lo > input.delta {
                let mid = (lo + hi) * cast::<T>(0.5);
                match interval(mid, kappa) {
                    Some(iv) => {
                        lo = mid;
                        iv_lo = iv;
                    }
                    None => hi = mid,
                }
            }
            (lo, iv_lo)
        };
        let alpha = (iv_k.0 + iv_k.1) * cast::<T>(0.5);
        let better = match &best {
            None => true,
            Some((c_best, _, _)) => c_k > *c_best,
        };
        if better {
            best = Some((c_k, alpha, kappa));
        }
    }

    let (c_star, alpha_star, kappa_star, weak) = match best {
        Some((c, alpha, kappa)) if c > T::zero() => (c, alpha, kappa, false),
        _ => (T::zero(), T::zero(), input.kappa_grid[0], true),
    };

    let n = a.cols();
    let m = a.rows();
    let p = Matrix::from_blocks(
        &Matrix::identity(n),
        &a.transpose().scale(alpha_star),
        &a.scale(alpha_star),
        &Matrix::identity(m),
    );
    let cert = PalCertificate {
        c_star,
        alpha_star,
        kappa_star,
        metric: Metric::new(p)?,
        weakly_contracting: weak,
    };
    if !weak {
        validate_certificate(input, &cert)?;
    }
    Ok(cert)
}

/// Re-checks the program constraints at the returned optimum (tolerance
/// 1e-9 on each).
fn validate_certificate<T: Real>(
    input: &PalProgramInput<T>,
    cert: &PalCertificate<T>,
) -> Result<()> {
    let tol = cast::<T>(1e-9);
    let two = cast::<T>(2.0);
    if cert.alpha_star > input.alpha_max() + tol {
        return Err(Error::Invariant(
            "certificate violates the alpha bound".into(),
        ));
    }
    if cert.kappa_star < two / cast::<T>(3.0) - tol {
        return Err(Error::Invariant(
            "certificate violates the kappa bound".into(),
        ));
    }
    let coef = (cast::<T>(0.75) - T::one() / (two * cert.kappa_star)) * input.a_min;
    if cert.c_star > coef * cert.alpha_star + tol {
        return Err(Error::Invariant(
            "certificate violates the rate bound".into(),
        ));
    }
    if pal_h(input, cert.c_star, cert.alpha_star, cert.kappa_star) < -tol {
        return Err(Error::Invariant("certificate violates h >= 0".into()));
    }
    Ok(())
}
