//! `eigopt` command-line tool: pseudospectral abscissa/radius solves, the
//! brute-force grid oracle, self checks, and boundary sampling, over Matrix
//! Market input.
//!
//! Exit codes: 0 converged / success, 1 input error, 2 iteration cap,
//! 3 degenerate stationary point, 4 simplicity loss, 5 failed self check.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use eigopt::eigderiv::check_derivatives;
use eigopt::gammabound::verify_gamma;
use eigopt::oracle::{grid_abscissa, grid_leftmost, grid_radius, sample_support_inequality, GridSpec};
use eigopt::pseudospectra::{
    boundary_samples, build_abscissa_problem, build_radius_problem, radius_report, PseudospectrumSpec, Target,
};
use eigopt::solver::{solve, Iterate, SolveResult, SolveStatus, SolverConfig};
use eigopt::{sample, CMatrix};
use eigopt_cli::record::{sha256_digest, RunConfig, RunDiagnostics, RunRecord, RunResult};
use eigopt_cli::mtx;

#[derive(Parser)]
#[command(
    name = "eigopt",
    version,
    about = "Pseudospectral abscissa and radius via eigenvalue-constrained optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolveArgs {
    /// Matrix Market file (array or coordinate; real, integer, or complex)
    matrix: PathBuf,
    /// Perturbation level
    #[arg(long)]
    epsilon: f64,
    /// Override the curvature bound
    #[arg(long)]
    gamma: Option<f64>,
    /// Relative step-size stopping tolerance
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Iteration cap
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Write the iterate trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a JSON run record
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Rightmost (or leftmost) point of the epsilon-pseudospectrum
    Psa {
        #[command(flatten)]
        args: SolveArgs,
        /// Chase the leftmost point and report its real part
        #[arg(long)]
        leftmost: bool,
    },
    /// Modulus of the outermost point of the epsilon-pseudospectrum
    Psr {
        #[command(flatten)]
        args: SolveArgs,
    },
    /// Brute-force grid value for cross-checking the solver
    Oracle {
        matrix: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Which extreme value to compute
        #[arg(long, value_enum)]
        target: OracleTarget,
        /// Grid points per axis
        #[arg(long, default_value_t = 201)]
        resolution: usize,
    },
    /// Derivative, support-inequality, and curvature-bound self checks
    Check {
        matrix: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Sample count per check
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Curvature bound to verify (defaults to the analytic value 2)
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Sample the pseudospectrum boundary into a CSV polyline
    Boundary {
        matrix: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Rays from the spectrum centroid (at least 8)
        #[arg(long, default_value_t = 360)]
        angles: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleTarget {
    Abscissa,
    Leftmost,
    Radius,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Psa { args, leftmost } => {
            let target = if leftmost { Target::Leftmost } else { Target::Rightmost };
            cmd_solve("psa", &args, target)
        }
        Command::Psr { args } => cmd_solve("psr", &args, Target::Outermost),
        Command::Oracle {
            matrix,
            epsilon,
            target,
            resolution,
        } => cmd_oracle(&matrix, epsilon, target, resolution),
        Command::Check {
            matrix,
            epsilon,
            samples,
            seed,
            gamma,
        } => cmd_check(&matrix, epsilon, samples, seed, gamma),
        Command::Boundary {
            matrix,
            epsilon,
            angles,
            out,
        } => cmd_boundary(&matrix, epsilon, angles, &out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn load_square_matrix(path: &Path) -> Result<(CMatrix, Vec<u8>), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let m = mtx::parse_matrix(bytes.as_slice()).map_err(|e| format!("{}: {e}", path.display()))?;
    if m.nrows() != m.ncols() {
        return Err(format!(
            "{}: matrix must be square, got {}x{}",
            path.display(),
            m.nrows(),
            m.ncols()
        ));
    }
    Ok((m, bytes))
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterations => "max_iterations",
        SolveStatus::DegenerateStationary => "degenerate_stationary",
        SolveStatus::NotSimpleAbort => "not_simple_abort",
    }
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::MaxIterations => 2,
        SolveStatus::DegenerateStationary => 3,
        SolveStatus::NotSimpleAbort => 4,
    }
}

fn cmd_solve(command: &str, args: &SolveArgs, target: Target) -> Result<u8, String> {
    let (a, bytes) = load_square_matrix(&args.matrix)?;
    let spec = PseudospectrumSpec::new(a, args.epsilon, target).map_err(|e| e.to_string())?;
    let mut problem = match target {
        Target::Outermost => build_radius_problem(&spec),
        _ => build_abscissa_problem(&spec),
    }
    .map_err(|e| e.to_string())?;

    let gamma_source = match (args.gamma, target) {
        (Some(g), _) => {
            problem.gamma = g;
            "user"
        }
        (None, Target::Outermost) => "gershgorin",
        (None, _) => "analytic",
    };

    let cfg = SolverConfig {
        step_tol: args.tol,
        max_iter: args.max_iter,
        ..SolverConfig::default()
    };
    let res = solve(&problem, &cfg).map_err(|e| e.to_string())?;

    let value = match target {
        Target::Outermost => radius_report(&res.omega_star).0,
        _ => res.omega_star[0],
    };
    println!("{value:.15}");

    if let Some(path) = &args.trace {
        write_trace(path, &res.trace).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(path) = &args.json {
        let record = build_record(command, target, args, &spec, &problem.c, problem.gamma, gamma_source, &cfg, &res, value, &bytes);
        std::fs::write(path, record.to_json()).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(status_code(res.status))
}

#[allow(clippy::too_many_arguments)]
fn build_record(
    command: &str,
    target: Target,
    args: &SolveArgs,
    _spec: &PseudospectrumSpec,
    _c: &nalgebra::DVector<f64>,
    gamma: f64,
    gamma_source: &str,
    cfg: &SolverConfig,
    res: &SolveResult,
    value: f64,
    input_bytes: &[u8],
) -> RunRecord {
    let target_name = match target {
        Target::Rightmost => "rightmost",
        Target::Leftmost => "leftmost",
        Target::Outermost => "outermost",
    };
    RunRecord {
        schema_version: 1,
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .unwrap_or_default()
            .as_secs(),
        input_digest: sha256_digest(input_bytes),
        config: RunConfig {
            command: command.to_string(),
            target: target_name.to_string(),
            epsilon: args.epsilon,
            gamma,
            gamma_source: gamma_source.to_string(),
            step_tol: cfg.step_tol,
            feasibility_tol: cfg.feasibility_tol,
            max_iter: cfg.max_iter,
            radicand_floor: cfg.radicand_floor,
        },
        result: RunResult {
            status: status_name(res.status).to_string(),
            value,
            objective: res.objective(),
            omega_star: res.omega_star.iter().copied().collect(),
            iterations: res.iterations(),
            gamma_violations: res.gamma_violations.len(),
        },
        diagnostics: res.diagnostics.as_ref().map(|d| RunDiagnostics {
            predicted_lo: d.predicted_lo,
            predicted_hi: d.predicted_hi,
            h_v: (0..d.h_v.nrows())
                .map(|i| (0..d.h_v.ncols()).map(|j| d.h_v[(i, j)]).collect())
                .collect(),
            final_empirical_ratio: d.empirical_ratios.last().copied(),
            final_tangential_fraction: d.tangential_fractions.last().copied(),
        }),
    }
}

fn write_trace(path: &Path, trace: &[Iterate]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "k,omega1,omega2,lambda,grad1,grad2,objective,gap")?;
    for it in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            it.k, it.omega[0], it.omega[1], it.lambda, it.grad[0], it.grad[1], it.objective, it.gap
        )?;
    }
    out.flush()
}

fn cmd_oracle(matrix: &Path, epsilon: f64, target: OracleTarget, resolution: usize) -> Result<u8, String> {
    let (a, _) = load_square_matrix(matrix)?;
    if !(epsilon > 0.0) {
        return Err(format!("epsilon must be positive, got {epsilon}"));
    }
    let base = GridSpec::covering(&a, epsilon).map_err(|e| e.to_string())?;
    let grid = GridSpec::new(base.center, base.half_width, resolution).map_err(|e| e.to_string())?;
    let value = match target {
        OracleTarget::Abscissa => grid_abscissa(&a, epsilon, &grid),
        OracleTarget::Leftmost => grid_leftmost(&a, epsilon, &grid),
        OracleTarget::Radius => grid_radius(&a, epsilon, &grid),
    }
    .map_err(|e| e.to_string())?;
    println!("{value:.15}");
    Ok(0)
}

fn cmd_check(matrix: &Path, epsilon: f64, samples: usize, seed: u64, gamma: Option<f64>) -> Result<u8, String> {
    let (a, _) = load_square_matrix(matrix)?;
    if samples == 0 {
        return Err("need at least one sample".into());
    }
    let spec = PseudospectrumSpec::new(a, epsilon, Target::Rightmost).map_err(|e| e.to_string())?;
    let mut problem = build_abscissa_problem(&spec).map_err(|e| e.to_string())?;
    let gamma = gamma.unwrap_or(problem.gamma);
    problem.gamma = gamma;

    let mut rng = sample::rng(seed);

    // Analytic derivatives against central differences near the start.
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    let mut used = 0;
    let mut tries = 0;
    while used < samples && tries < 50 * samples {
        tries += 1;
        let w = &problem.omega0 + sample::random_vector(&mut rng, 2, 0.7);
        let Ok(report) = check_derivatives(&problem.fam, &w, 1e-5) else {
            continue;
        };
        worst_grad = worst_grad.max(report.grad_err);
        worst_hess = worst_hess.max(report.hess_err);
        used += 1;
    }
    let deriv_grad_pass = used == samples && worst_grad <= 1e-5;
    let deriv_hess_pass = used == samples && worst_hess <= 1e-3;

    // Support inequality sampled around early iterates of a short run.
    let short = solve(
        &problem,
        &SolverConfig {
            max_iter: 10,
            ..SolverConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let mut worst_support = f64::INFINITY;
    for it in short.trace.iter().take(5) {
        worst_support = worst_support.min(sample_support_inequality(&problem, it, samples, 1.0, seed + it.k as u64));
    }
    let support_pass = worst_support >= -1e-10;

    // Sampled curvature against the bound.
    let points: Vec<_> = (0..samples)
        .map(|_| &problem.omega0 + sample::random_vector(&mut rng, 2, 1.0))
        .collect();
    let report = verify_gamma(&problem.fam, gamma, &points);
    let gamma_pass = !report.exceeded;

    let row = |name: &str, worst: String, tol: &str, pass: bool| {
        println!("{name:<28} {worst:>14} {tol:>10} {}", if pass { "PASS" } else { "FAIL" });
    };
    println!("{:<28} {:>14} {:>10} result", "check", "worst", "tolerance");
    row("gradient vs differences", format!("{worst_grad:.3e}"), "1e-5", deriv_grad_pass);
    row("hessian vs differences", format!("{worst_hess:.3e}"), "1e-3", deriv_hess_pass);
    row("support inequality", format!("{worst_support:.3e}"), "-1e-10", support_pass);
    row(
        &format!("curvature bound ({gamma})"),
        format!("{:.6}", report.max_curvature),
        "+1e-10",
        gamma_pass,
    );

    if deriv_grad_pass && deriv_hess_pass && support_pass && gamma_pass {
        Ok(0)
    } else {
        Ok(5)
    }
}

fn cmd_boundary(matrix: &Path, epsilon: f64, angles: usize, out: &Path) -> Result<u8, String> {
    let (a, _) = load_square_matrix(matrix)?;
    let spec = PseudospectrumSpec::new(a, epsilon, Target::Rightmost).map_err(|e| e.to_string())?;
    let points = boundary_samples(&spec, angles).map_err(|e| e.to_string())?;
    let file = File::create(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "re,im")?;
        for z in &points {
            writeln!(w, "{},{}", z.re, z.im)?;
        }
        w.flush()
    })()
    .map_err(|e| format!("{}: {e}", out.display()))?;
    Ok(0)
}

