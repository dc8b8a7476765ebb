//! Experiment reproduction: builds the two benchmark problems, integrates
//! their dynamics, certifies a contraction metric from the analytic
//! Jacobian value set, measures the parameter-Lipschitz constant, and
//! validates the tracking bounds against the measured error series.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tvopt_core::dynamics::{
    pal_field, pal_velocity, pd_field, pd_velocity, ConstraintData, ParameterCurve, ProblemData,
    VectorField,
};
use tvopt_core::linalg::{norm2, sub_vec, Matrix};
use tvopt_core::lmi::max_contraction_rate;
use tvopt_core::metric::{weighted_norm, Certificate};
use tvopt_core::monotone::MonotoneMap;
use tvopt_core::prox::ProxFamily;
use tvopt_core::rng::SplitMix64;
use tvopt_core::tracking::{asymptotic_bound, gronwall_bound, TrackingBoundInput};
use tvopt_core::tracking::{lip_theta_pal, lip_theta_pd};

use crate::integrate::{euler_integrate, Trajectory};
use crate::qp::{
    kkt_residual_equality, kkt_residual_inequality, qp_equality_optimum,
    qp_single_inequality_optimum,
};
use crate::SimError;

/// Which benchmark to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Time-varying quadratic program with one equality constraint solved
    /// by the primal-dual flow (linear dynamics, 3 primal + 1 dual states).
    EqualityA,
    /// Time-varying quadratic program with one inequality constraint solved
    /// by the flow on the proximal augmented Lagrangian (2 primal + 1 dual).
    InequalityB,
    /// Reserved for problem definitions supplied through the library API;
    /// rejected by the command-line runner.
    Custom,
}

fn default_omega() -> f64 {
    0.2
}
fn default_gamma() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    0.01
}
fn default_t_end() -> f64 {
    45.0
}

/// Run configuration. Unknown JSON keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
    /// Output path prefix; writes `<out>.csv` and `<out>.json`.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            omega: default_omega(),
            gamma: default_gamma(),
            dt: default_dt(),
            t_end: default_t_end(),
            initial_state: None,
            out: None,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0) || !(self.t_end > 0.0) || !self.omega.is_finite() {
            return Err(SimError::Config(format!(
                "need dt > 0, t_end > 0, finite omega; got dt = {}, t_end = {}, omega = {}",
                self.dt, self.t_end, self.omega
            )));
        }
        if self.experiment == ExperimentKind::InequalityB && !(self.gamma > 0.0) {
            return Err(SimError::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Outcome of the bound validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    /// Error stayed below the Gronwall bound (with discretization slack)
    /// and below the asymptotic bound after three time constants.
    Passed,
    /// Some grid point violated a bound.
    Violated,
    /// No strong contraction rate was certified; nothing to check against.
    SkippedUndecided,
}

/// Everything `run_experiment` produces.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub certificate: Certificate<f64>,
    pub certificate_undecided: bool,
    pub trajectory: Trajectory<f64>,
    pub gronwall: Vec<f64>,
    pub lip_theta_measured: f64,
    pub lip_theta_formula: f64,
    pub asymptotic_bound: f64,
    /// First grid time after which the error stays below the asymptotic
    /// bound for the rest of the run.
    pub bound_satisfied_after: Option<f64>,
    pub max_kkt_residual: f64,
    pub status: BoundStatus,
}

/// A fully assembled benchmark: the flow, its parameter-explicit velocity,
/// the analytic Jacobian value set, and the per-parameter optimum oracle.
struct Setup {
    field: VectorField<f64>,
    problem: ProblemData<f64>,
    velocity_kind: ExperimentKind,
    curve: ParameterCurve<f64>,
    jacobians: Vec<Matrix<f64>>,
    state_dim: usize,
}

impl Setup {
    fn velocity(&self, z: &[f64], theta: &[f64]) -> Vec<f64> {
        match self.velocity_kind {
            ExperimentKind::EqualityA => pd_velocity(&self.problem, z, theta),
            ExperimentKind::InequalityB => pal_velocity(&self.problem, z, theta),
            ExperimentKind::Custom => unreachable!("custom setups are never built"),
        }
        .expect("velocity evaluation")
    }

    /// Stacked instantaneous optimum `(x*(theta), lambda*(theta))` and its
    /// KKT residual.
    fn optimum(&self, theta: &[f64]) -> Result<(Vec<f64>, f64), SimError> {
        match self.velocity_kind {
            ExperimentKind::EqualityA => {
                let a = equality_constraint_matrix();
                let r = [theta[1], theta[0], 1.0];
                let b = [theta[1]];
                let (x, lam) = qp_equality_optimum(&r, &a, &b)?;
                let resid = kkt_residual_equality(&r, &a, &b, &x, &lam);
                let mut z = x;
                z.extend_from_slice(&lam);
                Ok((z, resid))
            }
            ExperimentKind::InequalityB => {
                let r = [theta[1], theta[0]];
                let a_row = [-1.0, 1.0];
                let (x, lam) = qp_single_inequality_optimum(&r, &a_row, theta[0])?;
                let resid = kkt_residual_inequality(&r, &a_row, theta[0], &x, lam);
                let mut z = x;
                z.push(lam);
                Ok((z, resid))
            }
            ExperimentKind::Custom => unreachable!(),
        }
    }

    fn lip_theta_formula(&self, metric: &tvopt_core::metric::Metric<f64>) -> f64 {
        match self.velocity_kind {
            // grad f and b both move 1:1 with theta
            ExperimentKind::EqualityA => lip_theta_pd(1.0, 1.0, metric),
            ExperimentKind::InequalityB => {
                let con = self
                    .problem
                    .constraint
                    .as_ref()
                    .expect("constraint present");
                lip_theta_pal(
                    1.0,
                    self.problem.prox.lip_theta(),
                    self.problem.gamma,
                    con.a_max(),
                    metric,
                )
                .expect("gamma validated")
            }
            ExperimentKind::Custom => unreachable!(),
        }
    }
}

fn equality_constraint_matrix() -> Matrix<f64> {
    Matrix::from_row_slice(1, 3, &[1.0, 2.0, 1.0]).expect("static shape")
}

/// Equality benchmark: `min (1/2)|x - r(t)|^2 s.t. x1 + 2 x2 + x3 = sin(wt)`
/// with `r(t) = (sin(wt), cos(wt), 1)` and `theta = (cos(wt), sin(wt))`.
fn build_equality(cfg: &ExperimentConfig) -> Result<Setup, SimError> {
    let a = equality_constraint_matrix();
    let operator = MonotoneMap::gradient_from_fn(3, 1.0, 1.0, 1.0, |x: &[f64], th: &[f64]| {
        vec![x[0] - th[1], x[1] - th[0], x[2] - 1.0]
    })?;
    let constraint = ConstraintData::new(a.clone(), |th: &[f64]| vec![th[1]], 1.0)?;
    let problem = ProblemData::new(operator, ProxFamily::Zero { dim: 3 }, Some(constraint), 1.0)?;
    let curve = ParameterCurve::circle(cfg.omega);
    let field = pd_field(&problem, &curve)?;
    // constant Jacobian [[-I, -A'], [A, 0]]
    let jac = Matrix::from_blocks(
        &Matrix::identity(3).scale(-1.0),
        &a.transpose().scale(-1.0),
        &a,
        &Matrix::zeros(1, 1),
    );
    Ok(Setup {
        field,
        problem,
        velocity_kind: ExperimentKind::EqualityA,
        curve,
        jacobians: vec![jac],
        state_dim: 4,
    })
}

/// Inequality benchmark: `min (1/2)|x + r(t)|^2 s.t. -x1 + x2 <= cos(wt)`
/// via the proximal augmented Lagrangian with `A = [-1, 1]` and the moving
/// halfspace `{ z <= theta_0 }`.
fn build_inequality(cfg: &ExperimentConfig) -> Result<Setup, SimError> {
    let a = Matrix::from_row_slice(1, 2, &[-1.0, 1.0]).expect("static shape");
    let gamma = cfg.gamma;
    let operator = MonotoneMap::gradient_from_fn(2, 1.0, 1.0, 1.0, |x: &[f64], th: &[f64]| {
        vec![x[0] + th[1], x[1] + th[0]]
    })?;
    // the augmented-Lagrangian flow carries the constraint through g(A x);
    // the linear block has no separate right-hand side
    let constraint = ConstraintData::new(a.clone(), |_: &[f64]| vec![0.0], 0.0)?;
    let problem = ProblemData::new(operator, ProxFamily::Halfspace, Some(constraint), gamma)?;
    let curve = ParameterCurve::circle(cfg.omega);
    let field = pal_field(&problem, &curve)?;
    // two Jacobian values, one per ReLU slope
    let jac = |j: f64| {
        Matrix::from_row_slice(
            3,
            3,
            &[
                -1.0 - j / gamma,
                j / gamma,
                j,
                j / gamma,
                -1.0 - j / gamma,
                -j,
                -j,
                j,
                -gamma + gamma * j,
            ],
        )
        .expect("static shape")
    };
    Ok(Setup {
        field,
        problem,
        velocity_kind: ExperimentKind::InequalityB,
        curve,
        jacobians: vec![jac(1.0), jac(0.0)],
        state_dim: 3,
    })
}

/// Number of `(z, theta, theta)` samples for the measured Lipschitz
/// constant.
const LIP_SAMPLES: usize = 10_000;
/// Sampling ball radius around trajectory points.
const LIP_BALL_RADIUS: f64 = 5.0;

fn measure_lip_theta(
    setup: &Setup,
    traj: &Trajectory<f64>,
    metric: &tvopt_core::metric::Metric<f64>,
    seed: u64,
) -> f64 {
    let mut rng = SplitMix64::new(seed.wrapping_add(0x5eed));
    let n = setup.state_dim;
    let mut best = 0.0f64;
    for _ in 0..LIP_SAMPLES {
        let anchor = &traj.states[rng.usize_below(traj.states.len())];
        let dir = rng.normal_vec(n);
        let nrm = norm2(&dir).max(1e-300);
        let radius = LIP_BALL_RADIUS * rng.next_f64().powf(1.0 / n as f64);
        let z: Vec<f64> = anchor
            .iter()
            .zip(&dir)
            .map(|(&ai, &di)| ai + radius * di / nrm)
            .collect();
        let t1 = unit_disc(&mut rng);
        let t2 = unit_disc(&mut rng);
        let dth = norm2(&sub_vec(&t1, &t2));
        if dth < 1e-9 {
            continue;
        }
        let dv = sub_vec(&setup.velocity(&z, &t1), &setup.velocity(&z, &t2));
        let num = weighted_norm(&dv, metric).expect("dimensions match");
        best = best.max(num / dth);
    }
    best
}

fn unit_disc(rng: &mut SplitMix64) -> Vec<f64> {
    let r = rng.next_f64().sqrt();
    let phi = rng.uniform(0.0, std::f64::consts::TAU);
    vec![r * phi.cos(), r * phi.sin()]
}

/// Slack multiple of `dt` allowed when comparing the measured error against
/// the Gronwall bound (covers forward-Euler discretization error).
pub const GRONWALL_DT_SLACK: f64 = 10.0;

/// Runs a benchmark end to end and (optionally) writes its report files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, SimError> {
    cfg.validate()?;
    let setup = match cfg.experiment {
        ExperimentKind::EqualityA => build_equality(cfg)?,
        ExperimentKind::InequalityB => build_inequality(cfg)?,
        ExperimentKind::Custom => {
            return Err(SimError::Config(
                "the command-line runner only builds the equality-a and inequality-b \
                 benchmarks; custom problems go through the library API"
                    .into(),
            ))
        }
    };

    let x0 = match &cfg.initial_state {
        Some(x) => {
            if x.len() != setup.state_dim {
                return Err(SimError::Config(format!(
                    "initial state has length {}, expected {}",
                    x.len(),
                    setup.state_dim
                )));
            }
            x.clone()
        }
        None => vec![0.0; setup.state_dim],
    };

    let mut traj = euler_integrate(&setup.field, &x0, cfg.dt, cfg.t_end)?;

    // instantaneous optima and their KKT residuals
    let mut max_kkt = 0.0f64;
    traj.optima = Vec::with_capacity(traj.len());
    for &t in &traj.t_grid {
        let theta = setup.curve.theta(t);
        let (zstar, resid) = setup.optimum(&theta)?;
        max_kkt = max_kkt.max(resid);
        traj.optima.push(zstar);
    }

    // certificate from the analytic Jacobian value set
    let est = max_contraction_rate(&setup.jacobians, None, 1e-3)
        .map_err(|e| SimError::Numerical(format!("certificate bisection failed: {e}")))?;
    let certificate = est.certificate.clone();
    let metric = &certificate.metric;
    let c = certificate.rate;

    traj.errors = traj
        .states
        .iter()
        .zip(&traj.optima)
        .map(|(z, zs)| weighted_norm(&sub_vec(z, zs), metric).expect("dimensions match"))
        .collect();
    traj.validate()?;

    let lip_measured = measure_lip_theta(&setup, &traj, metric, cfg.seed);
    let lip_formula = setup.lip_theta_formula(metric);

    // |theta_dot| along the run
    let udot: Vec<f64> = traj
        .t_grid
        .iter()
        .map(|&t| norm2(&setup.curve.theta_dot(t)))
        .collect();
    let sup_udot = udot.iter().cloned().fold(0.0f64, f64::max);

    // The bisection result is always a re-verified certificate; `undecided`
    // only flags that a larger rate was left unresolved, so the bounds are
    // still meaningful whenever a strong rate was certified. Only a weak
    // certificate (rate zero) leaves nothing to check.
    let (gronwall, asympt, bound_after, status) = if !(c > 0.0) {
        (Vec::new(), f64::NAN, None, BoundStatus::SkippedUndecided)
    } else {
        let curve = setup.curve.clone();
        let inp = TrackingBoundInput::new(c, lip_measured, traj.errors[0], move |t: f64| {
            norm2(&curve.theta_dot(t))
        })
        .map_err(|e| SimError::Numerical(e.to_string()))?;
        let gronwall =
            gronwall_bound(&inp, &traj.t_grid).map_err(|e| SimError::Numerical(e.to_string()))?;
        let asympt = asymptotic_bound(c, lip_measured, sup_udot)
            .map_err(|e| SimError::Numerical(e.to_string()))?;

        // first grid time after which the error never exceeds the
        // asymptotic bound again
        let mut bound_after = None;
        for k in (0..traj.len()).rev() {
            if traj.errors[k] > asympt {
                break;
            }
            bound_after = Some(traj.t_grid[k]);
        }

        // Gronwall holds pointwise up to discretization slack; the
        // asymptotic band is enforced after three time constants, also with
        // the slack so a vanishing band (static problems) reduces to the
        // Gronwall decay check.
        let slack = GRONWALL_DT_SLACK * cfg.dt;
        let settle = 3.0 / c;
        let mut ok = true;
        for k in 0..traj.len() {
            if traj.errors[k] > gronwall[k] + slack {
                ok = false;
                break;
            }
            if traj.t_grid[k] >= settle && traj.errors[k] > asympt + slack {
                ok = false;
                break;
            }
        }
        let status = if ok {
            BoundStatus::Passed
        } else {
            BoundStatus::Violated
        };
        (gronwall, asympt, bound_after, status)
    };

    let report = ExperimentReport {
        kind: cfg.experiment,
        certificate,
        certificate_undecided: est.undecided,
        trajectory: traj,
        gronwall,
        lip_theta_measured: lip_measured,
        lip_theta_formula: lip_formula,
        asymptotic_bound: asympt,
        bound_satisfied_after: bound_after,
        max_kkt_residual: max_kkt,
        status,
    };

    if let Some(prefix) = &cfg.out {
        write_report_files(&report, prefix)?;
    }
    Ok(report)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV schema: `t,state_0..state_{n-1},opt_0..opt_{n-1},error,bound`, 17
/// significant digits per value.
pub fn write_csv<W: Write>(report: &ExperimentReport, mut w: W) -> Result<(), SimError> {
    let n = report.trajectory.states[0].len();
    let mut header = String::from("t");
    for i in 0..n {
        header.push_str(&format!(",state_{i}"));
    }
    for i in 0..n {
        header.push_str(&format!(",opt_{i}"));
    }
    header.push_str(",error,bound");
    writeln!(w, "{header}")?;
    for k in 0..report.trajectory.len() {
        let mut line = fmt17(report.trajectory.t_grid[k]);
        for v in &report.trajectory.states[k] {
            line.push(',');
            line.push_str(&fmt17(*v));
        }
        for v in &report.trajectory.optima[k] {
            line.push(',');
            line.push_str(&fmt17(*v));
        }
        line.push(',');
        line.push_str(&fmt17(report.trajectory.errors[k]));
        line.push(',');
        let bound = report.gronwall.get(k).copied().unwrap_or(f64::NAN);
        line.push_str(&fmt17(bound));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// JSON summary with the certificate, both Lipschitz estimates, the
/// asymptotic bound, and the settle time.
pub fn summary_json(report: &ExperimentReport) -> serde_json::Value {
    let p = report.certificate.metric.weight();
    let rows: Vec<Vec<f64>> = (0..p.rows())
        .map(|i| (0..p.cols()).map(|j| p[(i, j)]).collect())
        .collect();
    serde_json::json!({
        "certificate": { "c": report.certificate.rate, "P": rows },
        "lip_theta_measured": report.lip_theta_measured,
        "lip_theta_formula": report.lip_theta_formula,
        "asymptotic_bound": if report.asymptotic_bound.is_finite() {
            serde_json::Value::from(report.asymptotic_bound)
        } else {
            serde_json::Value::Null
        },
        "bound_satisfied_after": report.bound_satisfied_after,
        "status": match report.status {
            BoundStatus::Passed => "passed",
            BoundStatus::Violated => "violated",
            BoundStatus::SkippedUndecided => "skipped-undecided",
        },
        "max_kkt_residual": report.max_kkt_residual,
        "certificate_undecided": report.certificate_undecided,
    })
}

pub fn write_report_files(report: &ExperimentReport, prefix: &Path) -> Result<(), SimError> {
    if let Some(dir) = prefix.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let csv_path = prefix.with_extension("csv");
    let json_path = prefix.with_extension("json");
    let mut csv = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    write_csv(report, &mut csv)?;
    csv.flush()?;
    let json = serde_json::to_string_pretty(&summary_json(report))
        .map_err(|e| SimError::Numerical(format!("serializing report: {e}")))?;
    std::fs::write(json_path, json + "\n")?;
    Ok(())
}
