//! Command-line front end: analyze / solve / discretize / fracsim / compare
//! on a TOML system definition, emitting deterministic JSON bundles.
//!
//! Exit codes: 0 success, 2 domain outcome (singular pencil, inconsistent
//! initial state, singular step matrix, ...), 1 parse/usage failure.

mod bundle;
mod spec_file;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use desys::discretize::{discrete_simulate, discretize, DiscretizedSystem};
use desys::fractional::{
    correspondence_diagnostic, nabla_apply, solve_fractional_system, CorrespondenceVerdict,
    FractionalOrder, FractionalSystem,
};
use desys::matrix::{Matrix, Tolerance};
use desys::pencil::{classify_pencil, det_polynomial, spectral_structure, Pencil, PencilClass};
use desys::sequence::SampleSequence;
use desys::signal::InputSignal;
use desys::solve::{residual_check, solve_continuous, solve_via_fundamental, Trajectory};
use desys::system::{build_system, consistency_check, DescriptorSystem};
use desys::weierstrass::{elementary_divisors, verify_decomposition, weierstrass_decompose};

use bundle::*;
use spec_file::SystemSpec;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Usage(String),
    Domain(desys::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Domain(err) => write!(f, "{err}"),
        }
    }
}

impl From<desys::Error> for CliError {
    fn from(err: desys::Error) -> Self {
        CliError::Domain(err)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "desys",
    version,
    about = "Descriptor-system analysis: pencil structure, closed-form solutions, \
             zero-order-hold discretization, and nabla fractional difference systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the pencil sF - G and report its spectral structure
    Analyze(CommonArgs),
    /// Solve the continuous system on a uniform time grid
    Solve(CommonArgs),
    /// Discretize under zero-order-hold sampling and simulate the recursion
    Discretize(CommonArgs),
    /// Simulate the singular fractional nabla difference system
    Fracsim(CommonArgs),
    /// Solve, discretize, run the fractional system, and probe the correspondence
    Compare(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// System definition file (TOML)
    file: PathBuf,
    /// Sampling period / time grid step
    #[arg(long = "T", value_name = "x")]
    period: Option<f64>,
    /// Fractional order n, 0 < n < 1 or 1 < n < 2
    #[arg(long = "order-n", value_name = "x")]
    order_n: Option<f64>,
    /// Number of steps / grid intervals
    #[arg(long, value_name = "k")]
    steps: Option<usize>,
    /// Replace an inconsistent initial state by its consistent projection
    #[arg(long)]
    project: bool,
    /// Also solve through the fundamental matrix and report the deviation
    #[arg(long)]
    crosscheck: bool,
    /// Exact rational arithmetic (analyze only)
    #[arg(long)]
    exact: bool,
    /// Pivot threshold for rank decisions
    #[arg(long = "rank-tol", value_name = "x")]
    rank_tol: Option<f64>,
    /// Write the primary table as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own help/version output; keep exit 0 for those.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (name, args) = match &cli.command {
        Command::Analyze(a) => ("analyze", a),
        Command::Solve(a) => ("solve", a),
        Command::Discretize(a) => ("discretize", a),
        Command::Fracsim(a) => ("fracsim", a),
        Command::Compare(a) => ("compare", a),
    };
    reject_inapplicable_flags(name, args)?;

    let bytes = std::fs::read(&args.file)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.file.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Parse("system file is not UTF-8".to_string()))?;
    let mut spec = SystemSpec::parse(&text)?;
    if let Some(rank_tol) = args.rank_tol {
        spec.tol.rank_tol = rank_tol;
    }
    let input = InputInfo {
        path: args.file.display().to_string(),
        sha256: hex_digest(&bytes),
    };

    match cli.command {
        Command::Analyze(args) => cmd_analyze(&spec, &args, input),
        Command::Solve(args) => cmd_solve(&spec, &args, input),
        Command::Discretize(args) => cmd_discretize(&spec, &args, input),
        Command::Fracsim(args) => cmd_fracsim(&spec, &args, input),
        Command::Compare(args) => cmd_compare(&spec, &args, input),
    }
}

fn reject_inapplicable_flags(command: &str, args: &CommonArgs) -> Result<(), CliError> {
    let reject = |flag: &str| {
        Err(CliError::Usage(format!(
            "--{flag} does not apply to `{command}`"
        )))
    };
    match command {
        "analyze" => {
            if args.period.is_some() {
                return reject("T");
            }
            if args.order_n.is_some() {
                return reject("order-n");
            }
            if args.steps.is_some() {
                return reject("steps");
            }
            if args.project {
                return reject("project");
            }
            if args.crosscheck {
                return reject("crosscheck");
            }
            if args.csv.is_some() {
                return reject("csv");
            }
        }
        "solve" | "discretize" => {
            if args.exact {
                return reject("exact");
            }
            if args.order_n.is_some() {
                return reject("order-n");
            }
            if command == "discretize" && args.project {
                return reject("project");
            }
            if command == "discretize" && args.crosscheck {
                return reject("crosscheck");
            }
        }
        "fracsim" => {
            if args.exact {
                return reject("exact");
            }
            if args.project {
                return reject("project");
            }
            if args.crosscheck {
                return reject("crosscheck");
            }
        }
        "compare" => {
            if args.exact {
                return reject("exact");
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn options_echo(spec: &SystemSpec, args: &CommonArgs, exact: bool) -> OptionsEcho {
    OptionsEcho {
        scalar_mode: if exact { "exact-rational" } else { "float64" },
        rank_tol: spec.tol.rank_tol,
        residual_tol: spec.tol.residual_tol,
        period: args.period,
        order_n: args.order_n,
        steps: args.steps,
        project: args.project,
        crosscheck: args.crosscheck,
    }
}

fn empty_bundle(command: &str, input: InputInfo, options: OptionsEcho) -> Bundle {
    Bundle {
        tool: ToolInfo::current(),
        command: command.to_string(),
        input,
        options,
        pencil: None,
        exact_structure: None,
        consistency: None,
        trajectory: None,
        residual_check: None,
        crosscheck: None,
        discretization: None,
        discrete_samples: None,
        fractional: None,
        comparison: None,
        correspondence: None,
    }
}

/// Pencil verdicts shared by every command. Returns `None` in the fields
/// beyond regularity when the pencil is singular.
fn pencil_info(pencil: &Pencil<f64>, tol: &Tolerance) -> Result<PencilInfo, CliError> {
    let m = pencil.dim();
    if classify_pencil(pencil, tol) == PencilClass::Singular {
        return Ok(PencilInfo {
            m,
            regular: false,
            det_polynomial: Some(det_polynomial(pencil, tol).coeffs),
            p: None,
            q: None,
            q_star: None,
            finite_eigenvalues: None,
            decomposition_residual_f: None,
            decomposition_residual_g: None,
        });
    }
    let spec = spectral_structure(pencil, tol)?;
    let dec = weierstrass_decompose(pencil, tol)?;
    let (rf, rg) = verify_decomposition(&dec, pencil)?;
    Ok(PencilInfo {
        m,
        regular: true,
        det_polynomial: Some(det_polynomial(pencil, tol).coeffs),
        p: Some(spec.p),
        q: Some(spec.q),
        q_star: Some(dec.q_star),
        finite_eigenvalues: Some(
            spec.finite
                .iter()
                .map(|(z, mult)| EigenvalueInfo {
                    re: z.re,
                    im: z.im,
                    multiplicity: *mult,
                })
                .collect(),
        ),
        decomposition_residual_f: Some(rf),
        decomposition_residual_g: Some(rg),
    })
}

fn emit(bundle: &Bundle) {
    println!("{}", to_json_string(bundle));
}

fn write_csv(path: &PathBuf, table: &SeriesTable) -> Result<(), CliError> {
    std::fs::write(path, to_csv(table))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_analyze(spec: &SystemSpec, args: &CommonArgs, input: InputInfo) -> Result<u8, CliError> {
    let pencil = Pencil::new(spec.f_matrix()?, spec.g_matrix()?)
        .map_err(|e| CliError::Parse(format!("system matrices: {e}")))?;
    let info = pencil_info(&pencil, &spec.tol)?;
    let regular = info.regular;

    let mut bundle = empty_bundle("analyze", input, options_echo(spec, args, args.exact));
    bundle.pencil = Some(info);

    if args.exact {
        let exact_pencil = Pencil::new(spec.f_matrix_exact()?, spec.g_matrix_exact()?)
            .map_err(|e| CliError::Parse(format!("system matrices: {e}")))?;
        let det = det_polynomial(&exact_pencil, &spec.tol);
        if regular {
            let div = elementary_divisors(&exact_pencil, &spec.tol)?;
            bundle.exact_structure = Some(ExactStructure {
                det_polynomial: det.coeffs.iter().map(|c| c.to_string()).collect(),
                finite_divisors: div
                    .finite
                    .iter()
                    .map(|(z, power)| ExactDivisor {
                        re: z.re.to_string(),
                        im: z.im.to_string(),
                        power: *power,
                    })
                    .collect(),
                infinite_divisors: div.infinite.clone(),
                p: div.p(),
                q: div.q(),
                q_star: div.q_star(),
            });
        } else {
            bundle.exact_structure = Some(ExactStructure {
                det_polynomial: det.coeffs.iter().map(|c| c.to_string()).collect(),
                finite_divisors: vec![],
                infinite_divisors: vec![],
                p: 0,
                q: 0,
                q_star: 0,
            });
        }
    }

    emit(&bundle);
    // Singularity is a verdict, reported with the domain exit code.
    Ok(if regular { 0 } else { 2 })
}

struct SolveSetup {
    sys: DescriptorSystem,
    y0: Vec<f64>,
    grid: Vec<f64>,
    consistency: ConsistencyInfo,
}

fn prepare_solve(
    spec: &SystemSpec,
    period: f64,
    steps: usize,
    project: bool,
) -> Result<SolveSetup, CliError> {
    let sys = build_system(spec.f_matrix()?, spec.g_matrix()?, spec.b_matrix()?, &spec.tol)?;
    let report = consistency_check(&sys, &spec.y0, &spec.signal, spec.t0)?;
    let y0 = if report.consistent {
        spec.y0.clone()
    } else if project {
        report.projected_y0.clone()
    } else {
        return Err(CliError::Domain(desys::Error::InconsistentInitialCondition {
            defect: report.defect,
        }));
    };
    let grid = (0..=steps).map(|k| spec.t0 + k as f64 * period).collect();
    Ok(SolveSetup {
        sys,
        y0,
        grid,
        consistency: ConsistencyInfo {
            consistent: report.consistent,
            defect: report.defect,
            projected_y0: report.projected_y0,
            projection_applied: !report.consistent && project,
        },
    })
}

fn trajectory_table(traj: &Trajectory) -> SeriesTable {
    SeriesTable {
        axis: "time",
        index: traj.times.clone(),
        states: traj.states.clone(),
    }
}

fn cmd_solve(spec: &SystemSpec, args: &CommonArgs, input: InputInfo) -> Result<u8, CliError> {
    let period = args.period.unwrap_or(0.1);
    let steps = args.steps.unwrap_or(50);
    let setup = prepare_solve(spec, period, steps, args.project)?;

    let traj = solve_continuous(&setup.sys, &setup.y0, &spec.signal, &setup.grid)?;
    let mut bundle = empty_bundle("solve", input, options_echo(spec, args, false));
    bundle.pencil = Some(pencil_info(setup.sys.pencil(), &spec.tol)?);
    bundle.consistency = Some(setup.consistency);
    bundle.residual_check = if traj.len() >= 3 {
        Some(residual_check(&setup.sys, &traj, &spec.signal)?)
    } else {
        None
    };
    if args.crosscheck {
        let other = solve_via_fundamental(&setup.sys, &setup.y0, &spec.signal, &setup.grid)?;
        let mut worst = 0.0f64;
        for (a, b) in traj.states.iter().zip(other.states.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).abs());
            }
        }
        bundle.crosscheck = Some(CrosscheckInfo {
            max_route_deviation: worst,
        });
    }
    let table = trajectory_table(&traj);
    if let Some(path) = &args.csv {
        write_csv(path, &table)?;
    }
    bundle.trajectory = Some(table);
    emit(&bundle);
    Ok(0)
}

fn sample_inputs_at(
    signal: &InputSignal,
    t0: f64,
    period: f64,
    lo: i64,
    hi: i64,
) -> SampleSequence {
    SampleSequence::new(
        lo,
        (lo..=hi)
            .map(|k| signal.eval(t0 + k as f64 * period))
            .collect(),
    )
}

fn discretization_info(dsys: &DiscretizedSystem, backfilled: bool) -> DiscretizationInfo {
    let rows = |m: &Matrix<f64>| -> Vec<Vec<f64>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
            .collect()
    };
    DiscretizationInfo {
        period: dsys.period,
        transition: rows(&dsys.a),
        slow_input_map: rows(&dsys.slow_input_map),
        fast_coeffs: dsys.fast_coeffs.iter().map(rows).collect(),
        q_star: dsys.q_star,
        memory_depth: dsys.memory_depth,
        prehistory_backfilled: backfilled,
    }
}

fn cmd_discretize(spec: &SystemSpec, args: &CommonArgs, input: InputInfo) -> Result<u8, CliError> {
    let period = args.period.unwrap_or(0.1);
    let steps = args.steps.unwrap_or(50);
    let sys = build_system(spec.f_matrix()?, spec.g_matrix()?, spec.b_matrix()?, &spec.tol)?;
    let dsys = discretize(&sys, period)?;
    let inputs = sample_inputs_at(&spec.signal, spec.t0, period, 0, steps as i64 + 1);
    let (samples, backfilled) = discrete_simulate(&dsys, &spec.y0, &inputs, steps)?;

    let mut bundle = empty_bundle("discretize", input, options_echo(spec, args, false));
    bundle.pencil = Some(pencil_info(sys.pencil(), &spec.tol)?);
    bundle.discretization = Some(discretization_info(&dsys, backfilled));
    let table = SeriesTable {
        axis: "index",
        index: (0..samples.len()).map(|k| k as f64).collect(),
        states: samples.vectors().to_vec(),
    };
    if let Some(path) = &args.csv {
        write_csv(path, &table)?;
    }
    bundle.discrete_samples = Some(table);
    emit(&bundle);
    Ok(0)
}

fn cmd_fracsim(spec: &SystemSpec, args: &CommonArgs, input: InputInfo) -> Result<u8, CliError> {
    let order = FractionalOrder::new(args.order_n.unwrap_or(0.5))?;
    let steps = args.steps.unwrap_or(50);
    let period = args.period.unwrap_or(1.0);
    let fsys = FractionalSystem::new(spec.f_matrix()?, spec.g_matrix()?, order, &spec.tol)?;
    let inputs = sample_inputs_at(&spec.signal_as_state_input()?, spec.t0, period, 0, steps as i64);
    let seq = solve_fractional_system(&fsys, &inputs, &spec.y0, steps)?;

    // Residual re-check through the operator.
    let mut worst = 0.0f64;
    for k in 1..=steps as i64 {
        let nabla = nabla_apply(&seq, order, k)?;
        let lhs = &fsys.f * &Matrix::col_vec(nabla);
        let rhs = &(&fsys.g * &Matrix::col_vec(seq.get(k)?.clone()))
            + &Matrix::col_vec(inputs.get(k)?.clone());
        worst = worst.max((&lhs - &rhs).max_abs());
    }

    let mut bundle = empty_bundle("fracsim", input, options_echo(spec, args, false));
    bundle.pencil = Some(pencil_info(
        &Pencil::new(spec.f_matrix()?, spec.g_matrix()?)
            .map_err(|e| CliError::Parse(format!("system matrices: {e}")))?,
        &spec.tol,
    )?);
    bundle.fractional = Some(FractionalInfo {
        order_n: order.value(),
        step_matrix_invertible: fsys.step_matrix_invertible,
        max_equation_residual: worst,
    });
    let table = SeriesTable {
        axis: "index",
        index: (0..seq.len()).map(|k| k as f64).collect(),
        states: seq.vectors().to_vec(),
    };
    if let Some(path) = &args.csv {
        write_csv(path, &table)?;
    }
    bundle.trajectory = Some(table);
    emit(&bundle);
    Ok(0)
}

fn cmd_compare(spec: &SystemSpec, args: &CommonArgs, input: InputInfo) -> Result<u8, CliError> {
    let period = args.period.unwrap_or(0.1);
    let order = FractionalOrder::new(args.order_n.unwrap_or(0.5))?;
    let steps = args.steps.unwrap_or(50);

    let mut bundle = empty_bundle("compare", input, options_echo(spec, args, false));
    let sys = build_system(spec.f_matrix()?, spec.g_matrix()?, spec.b_matrix()?, &spec.tol)?;
    bundle.pencil = Some(pencil_info(sys.pencil(), &spec.tol)?);

    if steps == 0 {
        // Header-only bundle: verdicts without tables.
        emit(&bundle);
        return Ok(0);
    }

    let setup = prepare_solve(spec, period, steps, args.project)?;
    let continuous = solve_continuous(&setup.sys, &setup.y0, &spec.signal, &setup.grid)?;
    bundle.consistency = Some(setup.consistency);
    bundle.residual_check = if continuous.len() >= 3 {
        Some(residual_check(&setup.sys, &continuous, &spec.signal)?)
    } else {
        None
    };
    if args.crosscheck {
        let other = solve_via_fundamental(&setup.sys, &setup.y0, &spec.signal, &setup.grid)?;
        let mut worst = 0.0f64;
        for (a, b) in continuous.states.iter().zip(other.states.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).abs());
            }
        }
        bundle.crosscheck = Some(CrosscheckInfo {
            max_route_deviation: worst,
        });
    }

    // Discrete recursion at the same instants.
    let dsys = discretize(&sys, period)?;
    let inputs = sample_inputs_at(&spec.signal, spec.t0, period, 0, steps as i64 + 1);
    let (discrete, backfilled) = discrete_simulate(&dsys, &setup.y0, &inputs, steps)?;
    bundle.discretization = Some(discretization_info(&dsys, backfilled));
    bundle.discrete_samples = Some(SeriesTable {
        axis: "index",
        index: (0..discrete.len()).map(|k| k as f64).collect(),
        states: discrete.vectors().to_vec(),
    });
    let per_step: Vec<f64> = discrete
        .vectors()
        .iter()
        .zip(continuous.states.iter())
        .map(|(d, c)| {
            d.iter()
                .zip(c.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    bundle.comparison = Some(ComparisonInfo {
        max_continuous_vs_discrete: per_step.iter().copied().fold(0.0, f64::max),
        continuous_vs_discrete: per_step,
    });

    // Fractional run over the same index range.
    let fsys = FractionalSystem::new(spec.f_matrix()?, spec.g_matrix()?, order, &spec.tol)?;
    let frac_inputs = sample_inputs_at(&spec.signal_as_state_input()?, spec.t0, period, 0, steps as i64);
    let frac = solve_fractional_system(&fsys, &frac_inputs, &setup.y0, steps)?;
    let mut frac_res = 0.0f64;
    for k in 1..=steps as i64 {
        let nabla = nabla_apply(&frac, order, k)?;
        let lhs = &fsys.f * &Matrix::col_vec(nabla);
        let rhs = &(&fsys.g * &Matrix::col_vec(frac.get(k)?.clone()))
            + &Matrix::col_vec(frac_inputs.get(k)?.clone());
        frac_res = frac_res.max((&lhs - &rhs).max_abs());
    }
    bundle.fractional = Some(FractionalInfo {
        order_n: order.value(),
        step_matrix_invertible: fsys.step_matrix_invertible,
        max_equation_residual: frac_res,
    });

    // Correspondence probe; the recursion inputs U_k are recovered from the
    // simulated states as U_k = Y_{k+1} - A Y_k.
    let recovered_inputs: Vec<Vec<f64>> = (0..steps as i64)
        .map(|k| {
            let yk = Matrix::col_vec(discrete.get(k).unwrap().clone());
            let yk1 = discrete.get(k + 1).unwrap();
            let ay = &dsys.a * &yk;
            (0..yk1.len()).map(|i| yk1[i] - ay[(i, 0)]).collect()
        })
        .collect();
    let report = correspondence_diagnostic(
        &dsys.a,
        sys.pencil().f(),
        order,
        steps,
        Some(&SampleSequence::from_zero(recovered_inputs)),
        &spec.tol,
    )?;
    bundle.correspondence = Some(CorrespondenceInfo {
        requested_order: report.requested_order,
        per_lag_delta: report.per_lag.clone(),
        max_delta: report.max_delta,
        lag1_delta: report.lag1_delta,
        best_fit_order: report.best_fit_order,
        verdict: match report.verdict {
            CorrespondenceVerdict::Exact => "exact",
            CorrespondenceVerdict::Approximate => "approximate",
            CorrespondenceVerdict::NotSatisfied => "not-satisfied",
        },
        aggregated_inputs: report.aggregated_inputs,
    });

    let table = trajectory_table(&continuous);
    if let Some(path) = &args.csv {
        write_csv(path, &table)?;
    }
    bundle.trajectory = Some(table);
    emit(&bundle);
    Ok(0)
}

impl SystemSpec {
    /// The fractional system consumes a state-sized input V_k; when the
    /// input dimension already matches the state this is the file's signal,
    /// otherwise the mismatch is an error.
    fn signal_as_state_input(&self) -> Result<InputSignal, CliError> {
        if self.r == self.m {
            Ok(self.signal.clone())
        } else {
            Err(CliError::Parse(format!(
                "fractional simulation needs a state-sized input (dimension {}), file provides {}",
                self.m, self.r
            )))
        }
    }
}
