//! `tvopt` command line: run the benchmark experiments, evaluate the
//! closed-form contraction rates, solve the augmented-Lagrangian
//! certificate program, and bisect common-Lyapunov LMIs from a matrix file.
//!
//! Exit codes: 0 success (bounds satisfied where applicable), 1 bounds
//! violated, 2 configuration error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tvopt_cli::{run_experiment, summary_json, BoundStatus, ExperimentConfig, ExperimentKind};
use tvopt_core::certify::{fb_rate, pal_certify, pd_certificate, proxgrad_rate, PalProgramInput};
use tvopt_core::linalg::Matrix;
use tvopt_core::lmi::{max_contraction_rate, DEFAULT_BISECTION_DELTA};

#[derive(Parser)]
#[command(
    name = "tvopt",
    version,
    about = "Contracting dynamics for time-varying convex optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark experiment and validate its tracking bounds.
    Run(RunArgs),
    /// Closed-form contraction rates.
    #[command(subcommand)]
    Rate(RateCommand),
    /// Solve the contraction-certificate program for the proximal
    /// augmented Lagrangian flow.
    CertifyPal(CertifyPalArgs),
    /// Common-Lyapunov bisection over a family of matrices from a JSON
    /// file (array of matrices, each an array of rows).
    Lmi(LmiArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// equality-a | inequality-b
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output path prefix; writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum RateCommand {
    /// Forward-backward splitting rate 1 - sqrt(1 - 2 gamma m + gamma^2 l^2).
    Fb(MonotoneRateArgs),
    /// Proximal gradient rate 1 - max(|1 - gamma m|, |1 - gamma l|).
    Proxgrad(MonotoneRateArgs),
    /// Primal-dual rate (5/18) min(a_min/l, (a_min/a_max) rho).
    Pd(PdRateArgs),
}

#[derive(Args)]
struct MonotoneRateArgs {
    #[arg(long)]
    m: f64,
    #[arg(long)]
    l: f64,
    #[arg(long)]
    gamma: f64,
}

#[derive(Args)]
struct PdRateArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    l: f64,
    #[arg(long)]
    amin: f64,
    #[arg(long)]
    amax: f64,
}

#[derive(Args)]
struct CertifyPalArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    l: f64,
    #[arg(long)]
    amin: f64,
    #[arg(long)]
    amax: f64,
    #[arg(long)]
    gamma: f64,
    /// Margin inside (0, 1/sqrt(a_max)); default 1e-3/sqrt(a_max).
    #[arg(long)]
    eps: Option<f64>,
    /// Bisection tolerance on the rate.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct LmiArgs {
    /// JSON file holding an array of square matrices (rows of numbers).
    file: PathBuf,
    /// Bisection tolerance on the rate.
    #[arg(long, default_value_t = DEFAULT_BISECTION_DELTA)]
    delta: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<tvopt_cli::SimError> for CliError {
    fn from(e: tvopt_cli::SimError) -> Self {
        match &e {
            tvopt_cli::SimError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<tvopt_core::Error> for CliError {
    fn from(e: tvopt_core::Error) -> Self {
        match &e {
            tvopt_core::Error::Domain(_)
            | tvopt_core::Error::Argument(_)
            | tvopt_core::Error::Dimension(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Rate(cmd) => rate(cmd),
        Command::CertifyPal(args) => certify_pal(args),
        Command::Lmi(args) => lmi(args),
    }
}

fn parse_kind(s: &str) -> Result<ExperimentKind, CliError> {
    match s {
        "equality-a" => Ok(ExperimentKind::EqualityA),
        "inequality-b" => Ok(ExperimentKind::InequalityB),
        "custom" => Ok(ExperimentKind::Custom),
        other => Err(CliError::Config(format!(
            "unknown experiment '{other}' (expected equality-a, inequality-b, or custom)"
        ))),
    }
}

fn run(args: RunArgs) -> Result<ExitCode, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?
        }
        None => {
            let kind = args
                .experiment
                .as_deref()
                .ok_or_else(|| CliError::Config("pass --experiment or --config".into()))
                .and_then(parse_kind)?;
            ExperimentConfig::new(kind)
        }
    };
    if let Some(k) = &args.experiment {
        cfg.experiment = parse_kind(k)?;
    }
    if let Some(v) = args.omega {
        cfg.omega = v;
    }
    if let Some(v) = args.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = args.out {
        cfg.out = Some(v);
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }

    let report = run_experiment(&cfg)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&summary_json(&report)).expect("serializable summary")
    );
    Ok(match report.status {
        BoundStatus::Passed => ExitCode::SUCCESS,
        BoundStatus::Violated => ExitCode::from(1),
        BoundStatus::SkippedUndecided => ExitCode::from(3),
    })
}

fn rate(cmd: RateCommand) -> Result<ExitCode, CliError> {
    match cmd {
        RateCommand::Fb(a) => {
            let r = fb_rate(a.m, a.l, a.gamma)?;
            println!("{r:.12}");
        }
        RateCommand::Proxgrad(a) => {
            let r = proxgrad_rate(a.m, a.l, a.gamma)?;
            println!("{r:.12}");
        }
        RateCommand::Pd(a) => {
            let g = pd_certificate(a.rho, a.l, a.amin, a.amax)?;
            println!("{}", serde_json::json!({ "c": g.c, "alpha": g.alpha }));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn certify_pal(args: CertifyPalArgs) -> Result<ExitCode, CliError> {
    let eps = args.eps.unwrap_or(1e-3 / args.amax.sqrt());
    let mut input = PalProgramInput::new(
        args.rho,
        args.l,
        args.amin,
        args.amax,
        args.gamma,
        eps,
        tvopt_core::certify::default_kappa_grid(),
        args.delta.unwrap_or(tvopt_core::certify::DEFAULT_PAL_DELTA),
    )?;
    if let Some(d) = args.delta {
        input.delta = d;
    }
    // certificate for a canonical constraint matrix with the declared
    // spectrum: scaled orthonormal rows
    let a = canonical_constraint(args.amin, args.amax);
    let cert = pal_certify(&input, &a)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "c_star": cert.c_star,
            "alpha_star": cert.alpha_star,
            "kappa_star": cert.kappa_star,
            "weakly_contracting": cert.weakly_contracting,
        }))
        .expect("serializable certificate")
    );
    Ok(ExitCode::SUCCESS)
}

/// A 1 x 2 constraint row realizing `A A' = a_min` (the certificate depends
/// on `A` only through the declared spectral band).
fn canonical_constraint(a_min: f64, _a_max: f64) -> Matrix<f64> {
    let s = a_min.sqrt();
    Matrix::from_row_slice(1, 2, &[s, 0.0]).expect("static shape")
}

fn lmi(args: LmiArgs) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", args.file.display())))?;
    let raw: Vec<Vec<Vec<f64>>> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing {}: {e}", args.file.display())))?;
    if raw.is_empty() {
        return Err(CliError::Config("matrix file holds no matrices".into()));
    }
    let mut mats = Vec::with_capacity(raw.len());
    for (idx, rows) in raw.iter().enumerate() {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Config(format!(
                "matrix {idx} is not square (rows of unequal length)"
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        mats.push(
            Matrix::from_row_slice(n, n, &flat).map_err(|e| CliError::Config(e.to_string()))?,
        );
    }
    let est = max_contraction_rate(&mats, None, args.delta)?;
    let p = est.certificate.metric.weight();
    let rows: Vec<Vec<f64>> = (0..p.rows())
        .map(|i| (0..p.cols()).map(|j| p[(i, j)]).collect())
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "c": est.certificate.rate,
            "P": rows,
            "undecided": est.undecided,
        }))
        .expect("serializable result")
    );
    Ok(ExitCode::SUCCESS)
}
