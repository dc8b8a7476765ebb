//! Dynamics-level properties that need the integrator or the QP oracles:
//! zero velocity at optimizers, equilibrium consistency of long runs,
//! pairwise contraction decay under the certified metrics, agreement of
//! the transcriptions where they coincide, and the Dini/Lipschitz behavior
//! of the tracked error.

mod common;

use common::{assert_pairwise_decay, fb_instance, pal_instance, pd_instance};
use tvopt_cli::integrate::euler_integrate;
use tvopt_cli::qp::{qp_equality_optimum, qp_single_inequality_optimum};
use tvopt_core::dynamics::{
    fb_equilibrium_residual, fb_field, fb_velocity, pal_field, pal_velocity, pd_field, pd_velocity,
    ConstraintData, ParameterCurve, ProblemData,
};
use tvopt_core::linalg::{norm2, sub_vec, Matrix};
use tvopt_core::metric::{weighted_norm, Metric};
use tvopt_core::monotone::MonotoneMap;
use tvopt_core::prox::{prox_affine_set, ProxFamily};
use tvopt_core::rng::SplitMix64;

#[test]
fn fb_dynamics_contract_at_certified_rate() {
    let (data, rate) = fb_instance();
    let field = fb_field(&data, &ParameterCurve::constant(vec![]));
    assert_pairwise_decay(&field, &Metric::identity(3), rate, 0.01, 41, 2.0);
}

#[test]
fn fb_long_run_reaches_equilibrium() {
    let (data, rate) = fb_instance();
    let field = fb_field(&data, &ParameterCurve::constant(vec![]));
    let t_end = 20.0 / rate;
    let traj = euler_integrate(&field, &[1.0, -2.0, 0.5], 0.01, t_end).unwrap();
    let x_end = traj.states.last().unwrap();
    let resid = fb_equilibrium_residual(x_end, &data, &[]).unwrap();
    assert!(resid < 1e-6, "equilibrium residual after 20/c: {resid}");
}

#[test]
fn pd_dynamics_contract_at_certified_rate() {
    let (data, c, metric) = pd_instance();
    let field = pd_field(&data, &ParameterCurve::constant(vec![0.0])).unwrap();
    assert_pairwise_decay(&field, &metric, c, 0.01, 43, 2.0);
}

#[test]
fn pd_velocity_vanishes_at_kkt_point() {
    // min (1/2)|x - r|^2 s.t. A x = b has a closed-form optimizer; the
    // primal-dual field must vanish exactly there
    let a = Matrix::from_row_slice(1, 3, &[1.0, 2.0, 1.0]).unwrap();
    let r = [0.0, 1.0, 1.0];
    let (xs, ls) = qp_equality_optimum(&r, &a, &[0.0]).unwrap();
    let op = MonotoneMap::gradient_from_fn(3, 1.0, 1.0, 0.0, move |x: &[f64], _: &[f64]| {
        vec![x[0] - r[0], x[1] - r[1], x[2] - r[2]]
    })
    .unwrap();
    let con = ConstraintData::new(a, |_: &[f64]| vec![0.0], 0.0).unwrap();
    let data = ProblemData::new(op, ProxFamily::Zero { dim: 3 }, Some(con), 1.0).unwrap();
    let mut z = xs.clone();
    z.extend_from_slice(&ls);
    let v = pd_velocity(&data, &z, &[]).unwrap();
    assert!(
        norm2(&v) < 1e-12,
        "velocity at the saddle point: {}",
        norm2(&v)
    );
}

#[test]
fn pal_dynamics_contract_at_certified_rate() {
    let (data, c, metric) = pal_instance();
    let field = pal_field(&data, &ParameterCurve::constant(vec![0.4])).unwrap();
    assert_pairwise_decay(&field, &metric, c, 0.01, 47, 1.5);
}

#[test]
fn pal_velocity_vanishes_at_saddle_point() {
    // inequality experiment instance at a frozen parameter: the optimizer
    // and multiplier from the single-inequality QP make the flow stationary
    let gamma = 10.0;
    let theta = [0.6, -0.3]; // a frozen (cos, sin)-style parameter
    let r = [theta[1], theta[0]];
    let (xs, ls) = qp_single_inequality_optimum(&r, &[-1.0, 1.0], theta[0]).unwrap();
    let op = MonotoneMap::gradient_from_fn(2, 1.0, 1.0, 1.0, |x: &[f64], th: &[f64]| {
        vec![x[0] + th[1], x[1] + th[0]]
    })
    .unwrap();
    let a = Matrix::from_row_slice(1, 2, &[-1.0, 1.0]).unwrap();
    let con = ConstraintData::new(a, |_: &[f64]| vec![0.0], 0.0).unwrap();
    let data = ProblemData::new(op, ProxFamily::Halfspace, Some(con), gamma).unwrap();
    let z = vec![xs[0], xs[1], ls];
    let v = pal_velocity(&data, &z, &theta).unwrap();
    assert!(
        norm2(&v) < 1e-12,
        "velocity at the saddle point: {} (z = {z:?})",
        norm2(&v)
    );
}

#[test]
fn projected_dynamics_equal_fb_with_affine_indicator() {
    // with g the indicator of {A z = b}, the forward-backward field equals
    // the explicit pseudoinverse form of the projected dynamics pointwise
    let a = Matrix::from_row_slice(1, 3, &[1.0, 2.0, 1.0]).unwrap();
    let b = [0.7];
    let gamma = 0.8;
    let h = Matrix::from_row_slice(3, 3, &[1.3, 0.1, 0.0, 0.1, 1.1, 0.2, 0.0, 0.2, 1.6]).unwrap();
    let hh = h.clone();
    let op =
        MonotoneMap::gradient_from_fn(3, 1.0, 2.0, 0.0, move |x: &[f64], _: &[f64]| hh.matvec(x))
            .unwrap();
    let fam = ProxFamily::affine_set(a.clone()).unwrap();
    let data = ProblemData::new(op, fam, None, gamma).unwrap();

    let mut rng = SplitMix64::new(53);
    for _ in 0..100 {
        let x = rng.normal_vec(3);
        let got = fb_velocity(&data, &x, &b).unwrap();
        // explicit projected form: -x + proj(x - gamma grad f(x))
        let inner: Vec<f64> = {
            let g = h.matvec(&x);
            x.iter().zip(&g).map(|(&xi, &gi)| xi - gamma * gi).collect()
        };
        let proj = prox_affine_set(&inner, &a, &b).unwrap();
        for i in 0..3 {
            assert!(
                (got[i] - (proj[i] - x[i])).abs() < 1e-10,
                "projected dynamics mismatch"
            );
        }
    }
}

#[test]
fn pal_equilibrium_matches_fb_equilibrium_for_identity_constraint() {
    // with A = I the composite problem is the plain inclusion; both flows
    // must settle on the same primal point
    let h = Matrix::from_row_slice(2, 2, &[1.4, 0.2, 0.2, 1.0]).unwrap();
    let rho = tvopt_core::linalg::sym_eigenvalues(&h).unwrap()[0];
    let ell = *tvopt_core::linalg::sym_eigenvalues(&h)
        .unwrap()
        .last()
        .unwrap();
    let gamma = 1.0;
    let mk_op = || {
        let hh = h.clone();
        MonotoneMap::gradient_from_fn(2, rho, ell, 0.0, move |x: &[f64], _: &[f64]| {
            let mut v = hh.matvec(x);
            v[0] -= 1.0;
            v[1] += 0.5;
            v
        })
        .unwrap()
    };
    let fam = ProxFamily::l1(2, 0.3).unwrap();
    let fb_data = ProblemData::new(mk_op(), fam.clone(), None, gamma).unwrap();
    let fb = fb_field(&fb_data, &ParameterCurve::constant(vec![]));
    let fb_traj = euler_integrate(&fb, &[0.0, 0.0], 0.005, 80.0).unwrap();
    let fb_end = fb_traj.states.last().unwrap().clone();

    let con = ConstraintData::new(Matrix::identity(2), |_: &[f64]| vec![0.0, 0.0], 0.0).unwrap();
    let pal_data = ProblemData::new(mk_op(), fam, Some(con), gamma).unwrap();
    let pal = pal_field(&pal_data, &ParameterCurve::constant(vec![])).unwrap();
    let pal_traj = euler_integrate(&pal, &[0.0, 0.0, 0.0, 0.0], 0.005, 80.0).unwrap();
    let pal_end = &pal_traj.states.last().unwrap()[..2];

    for i in 0..2 {
        assert!(
            (fb_end[i] - pal_end[i]).abs() < 1e-5,
            "primal equilibria differ: {fb_end:?} vs {pal_end:?}"
        );
    }
    // and the settled point solves the inclusion
    assert!(fb_equilibrium_residual(&fb_end, &fb_data, &[]).unwrap() < 1e-6);
}

#[test]
fn fields_are_continuous_along_segments() {
    let (data, _) = fb_instance();
    let field = fb_field(&data, &ParameterCurve::constant(vec![]));
    let mut rng = SplitMix64::new(59);
    for _ in 0..20 {
        let from = rng.normal_vec(3);
        let to = rng.normal_vec(3);
        let jump = tvopt_core::dynamics::max_segment_jump(&field, &from, &to, 2000, 0.0);
        // Lipschitz constant of the field is at most 1 + Lip(prox o inner),
        // well under 10 for this instance; steps are |to-from|/2000
        let step = norm2(&sub_vec(&to, &from)) / 2000.0;
        assert!(jump <= 10.0 * step, "jump {jump} vs step {step}");
    }
}

#[test]
fn dini_derivative_of_tracked_error_obeys_theorem_bound() {
    // equality experiment: forward difference quotients of the measured
    // error never exceed -c e + (lip/c)|u_dot| + Euler slack
    let cfg = tvopt_cli::ExperimentConfig::new(tvopt_cli::ExperimentKind::EqualityA);
    let report = tvopt_cli::run_experiment(&cfg).unwrap();
    let c = report.certificate.rate;
    let lip = report.lip_theta_measured;
    let dt = cfg.dt;
    let omega = cfg.omega;
    let errors = &report.trajectory.errors;
    for k in 0..errors.len() - 1 {
        let dq = (errors[k + 1] - errors[k]) / dt;
        let bound = -c * errors[k] + lip / c * omega + 10.0 * dt;
        assert!(
            dq <= bound + 1e-9,
            "Dini bound violated at step {k}: {dq} > {bound}"
        );
    }
}

#[test]
fn equilibrium_curve_is_lipschitz_along_the_run() {
    // |x*(theta(t+h)) - x*(theta(t))| <= (lip/c) |theta(t+h) - theta(t)|
    let cfg = tvopt_cli::ExperimentConfig::new(tvopt_cli::ExperimentKind::EqualityA);
    let report = tvopt_cli::run_experiment(&cfg).unwrap();
    let c = report.certificate.rate;
    let lip = report.lip_theta_measured;
    let metric = &report.certificate.metric;
    let curve = ParameterCurve::circle(cfg.omega);
    let optima = &report.trajectory.optima;
    let ratio = lip / c;
    for k in 0..optima.len() - 1 {
        let t0 = report.trajectory.t_grid[k];
        let t1 = report.trajectory.t_grid[k + 1];
        let moved = weighted_norm(&sub_vec(&optima[k + 1], &optima[k]), metric).unwrap();
        let dtheta = norm2(&sub_vec(&curve.theta(t1), &curve.theta(t0)));
        assert!(
            moved <= ratio * dtheta * (1.0 + 1e-6),
            "equilibrium curve moved {moved} for |dtheta| = {dtheta} at step {k}"
        );
    }
}
