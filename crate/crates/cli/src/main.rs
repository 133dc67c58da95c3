use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sigrec::certify::{d_spark, drip_constant, rip_constant, spark, CertifyConfig};
use sigrec::enumerate::DEFAULT_BUDGET;
use sigrec::experiment::{
    run_phase_grid, verify_representation_suite, verify_stability_suite, verify_uniqueness_suite, write_phase_csv,
    PhaseGridConfig, SuiteReport,
};
use sigrec::linalg::text::{read_matrix, read_vector, write_matrix, write_vector};
use sigrec::linalg::{DenseMatrix, DEFAULT_REL_TOL};
use sigrec::model::{
    gen_duplicated_dictionary, gen_gaussian_measurement, gen_paper_dictionary, gen_sparse_representation,
    gen_sphere_noise, read_bundle, write_bundle, Dictionary, GeneratorNames, InstanceBundle, InstanceMeta, MeasurementOperator,
    ProblemInstance, RngStream,
};
use sigrec::solvers::{assess_recovery, solve_l0_with_budget, solve_l1, SolverParams, DEFAULT_RECOVERY_RTOL};
use sigrec::Error;

/// Stream used by `gen-dict` for a given seed.
const DICT_STREAM: u64 = 0;
/// Stream used by `gen-measurement` for a given seed.
const MEASUREMENT_STREAM: u64 = 1;

#[derive(Parser)]
#[command(name = "sigrec", version, about = "Sparse recovery certificates, solvers and experiments")]
struct Cli {
    /// Worker threads (default: all available cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dictionary matrix file.
    GenDict(GenDictArgs),
    /// Generate a Gaussian measurement matrix file.
    GenMeasurement(GenMeasurementArgs),
    /// Generate a complete problem instance directory.
    GenInstance(GenInstanceArgs),
    /// Compute a spark, D-spark, RIP or D-RIP certificate.
    Certify {
        #[command(subcommand)]
        kind: CertifyCommand,
    },
    /// Solve the sparse recovery problem by the l0 oracle or l1 basis pursuit.
    Solve {
        #[command(subcommand)]
        kind: SolveCommand,
    },
    /// Run the phase-grid experiment and write a CSV of cell results.
    Phase(PhaseArgs),
    /// Run a theorem-verification suite and print its report.
    Verify {
        #[command(subcommand)]
        suite: VerifyCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DictKind {
    /// Coherent two-block construction, d x 2d.
    Paper,
    /// One Gaussian atom repeated n times.
    Dup,
}

#[derive(Args)]
struct GenDictArgs {
    #[arg(long, value_enum)]
    kind: DictKind,
    /// Signal dimension.
    #[arg(long)]
    d: usize,
    /// Atom count (duplicated dictionary only).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenMeasurementArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceDict {
    Paper,
    Dup,
    Gaussian,
    Identity,
}

#[derive(Args)]
struct GenInstanceArgs {
    #[arg(long, value_enum, default_value = "paper")]
    dict: InstanceDict,
    #[arg(long)]
    d: usize,
    /// Atom count (duplicated and Gaussian dictionaries only).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: usize,
    /// Sparsity of the true representation.
    #[arg(long)]
    k: usize,
    /// Noise norm; the noise is drawn uniformly on the sphere of this radius.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyOptions {
    /// Relative rank tolerance.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Ceiling on the number of supports examined.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Subcommand)]
enum CertifyCommand {
    /// Smallest number of linearly dependent columns of A.
    Spark {
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        /// Largest support size to examine.
        #[arg(long)]
        cap: usize,
        #[command(flatten)]
        opts: CertifyOptions,
    },
    /// Smallest support whose dictionary span meets the null space of M.
    Dspark {
        #[arg(long = "M", value_name = "PATH")]
        m: PathBuf,
        #[arg(long = "D", value_name = "PATH")]
        d: PathBuf,
        #[arg(long)]
        cap: usize,
        #[command(flatten)]
        opts: CertifyOptions,
    },
    /// Restricted isometry constant of A at sparsity k.
    Rip {
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opts: CertifyOptions,
    },
    /// Restricted isometry constant of M over spans of k dictionary atoms.
    Drip {
        #[arg(long = "M", value_name = "PATH")]
        m: PathBuf,
        #[arg(long = "D", value_name = "PATH")]
        d: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opts: CertifyOptions,
    },
}

#[derive(Args)]
struct ProblemSource {
    /// Instance directory written by `gen-instance`.
    #[arg(long, conflicts_with_all = ["a", "y"], required_unless_present_all = ["a", "y"])]
    instance: Option<PathBuf>,
    /// Effective operator (used with --y).
    #[arg(long = "A", value_name = "PATH", requires = "y")]
    a: Option<PathBuf>,
    /// Measurements (used with --A).
    #[arg(long, value_name = "PATH", requires = "a")]
    y: Option<PathBuf>,
    /// Output file for the recovered representation.
    #[arg(long, default_value = "alpha_hat.vec")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Exhaustive sparsest-solution search.
    L0 {
        #[command(flatten)]
        src: ProblemSource,
        /// Largest support size to search.
        #[arg(long)]
        k_max: usize,
        /// Residual radius (defaults to the instance epsilon, or 0).
        #[arg(long)]
        eps: Option<f64>,
        /// Return every minimizer instead of the lexicographically first.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// l1 basis pursuit.
    L1 {
        #[command(flatten)]
        src: ProblemSource,
        /// Residual radius; 0 solves the equality-constrained problem.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = SolverParams::default().feas_tol)]
        feas_tol: f64,
        #[arg(long, default_value_t = SolverParams::default().obj_tol)]
        obj_tol: f64,
        #[arg(long, default_value_t = SolverParams::default().max_iterations)]
        max_iterations: usize,
    },
}

#[derive(Args)]
struct PhaseArgs {
    /// JSON configuration; omitted fields of `solver` take their defaults.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Signal-domain uniqueness under a certified D-spark hypothesis.
    Uniqueness(SuiteArgs),
    /// Signal-domain stability under an exact D-RIP hypothesis.
    Stability {
        #[command(flatten)]
        args: SuiteArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Representation-domain uniqueness and stability with an identity dictionary.
    Representation {
        #[command(flatten)]
        args: SuiteArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Parse { .. } | Error::Json(_) => 1,
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } => 2,
            Error::BudgetExceeded { .. } | Error::Infeasible { .. } | Error::InfeasibleEquality { .. } => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serialises"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::GenDict(a) => gen_dict(a),
        Command::GenMeasurement(a) => gen_measurement(a),
        Command::GenInstance(a) => gen_instance(a),
        Command::Certify { kind } => certify(kind),
        Command::Solve { kind } => solve(kind),
        Command::Phase(a) => phase(a),
        Command::Verify { suite } => verify(suite),
    }
}

fn gaussian_atom(d: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..d).map(|_| rng.normal()).collect()
}

fn gen_dict(a: GenDictArgs) -> CliResult {
    let mut rng = RngStream::new(a.seed, DICT_STREAM);
    let dict: Dictionary<f64> = match a.kind {
        DictKind::Paper => {
            if a.n.is_some() {
                return Err(Failure::usage("--n is fixed to 2d for the paper dictionary"));
            }
            gen_paper_dictionary(a.d, &mut rng)?
        }
        DictKind::Dup => {
            let n = a.n.ok_or_else(|| Failure::usage("--n is required for --kind dup"))?;
            gen_duplicated_dictionary(&gaussian_atom(a.d, &mut rng), n)?
        }
    };
    write_matrix(&a.out, dict.matrix())?;
    print_json(&json!({"out": a.out, "rows": dict.d(), "cols": dict.n()}));
    Ok(0)
}

fn gen_measurement(a: GenMeasurementArgs) -> CliResult {
    let mut rng = RngStream::new(a.seed, MEASUREMENT_STREAM);
    let op = gen_gaussian_measurement::<f64>(a.m, a.d, &mut rng)?;
    write_matrix(&a.out, op.matrix())?;
    print_json(&json!({"out": a.out, "rows": op.m(), "cols": op.d()}));
    Ok(0)
}

/// Draws the dictionary, measurement, representation and noise, in that order, from one stream.
fn gen_instance(a: GenInstanceArgs) -> CliResult {
    let mut rng = RngStream::new(a.seed, a.stream);
    let needs_n = matches!(a.dict, InstanceDict::Dup | InstanceDict::Gaussian);
    if needs_n != a.n.is_some() {
        return Err(Failure::usage(if needs_n {
            "--n is required for dup and gaussian dictionaries"
        } else {
            "--n applies only to dup and gaussian dictionaries"
        }));
    }
    let (dict, dict_name) = match a.dict {
        InstanceDict::Paper => (gen_paper_dictionary(a.d, &mut rng)?, "paper"),
        InstanceDict::Dup => {
            let z = gaussian_atom(a.d, &mut rng);
            (gen_duplicated_dictionary(&z, a.n.unwrap_or(0))?, "duplicated")
        }
        InstanceDict::Gaussian => {
            let n = a.n.unwrap_or(0);
            let data = (0..a.d * n).map(|_| rng.normal()).collect();
            (Dictionary::new(DenseMatrix::from_row_major(a.d, n, data)?)?, "gaussian")
        }
        InstanceDict::Identity => (Dictionary::identity(a.d)?, "identity"),
    };
    let op = gen_gaussian_measurement(a.m, a.d, &mut rng)?;
    let alpha0 = gen_sparse_representation(dict.n(), a.k, &mut rng)?;
    let noise = gen_sphere_noise(a.m, a.eps, &mut rng);
    let meta = InstanceMeta {
        d: a.d,
        n: dict.n(),
        m: a.m,
        k: a.k,
        epsilon: a.eps,
        master_seed: a.seed,
        stream_id: a.stream,
        generators: GeneratorNames {
            dictionary: dict_name.into(),
            measurement: "gaussian".into(),
            representation: "uniform-support-gaussian-values".into(),
            noise: "uniform-sphere".into(),
        },
    };
    let instance = ProblemInstance::new(dict, op, alpha0, noise, a.eps)?;
    write_bundle(&a.out, &InstanceBundle { instance, meta })?;
    let files: Vec<PathBuf> = ["D.mat", "M.mat", "alpha0.vec", "y.vec", "meta.json"]
        .iter()
        .map(|f| a.out.join(f))
        .collect();
    print_json(&json!({ "out": files }));
    Ok(0)
}

fn certify_config(opts: &CertifyOptions) -> CertifyConfig<f64> {
    CertifyConfig {
        rel_tol: opts.rel_tol,
        budget: opts.budget,
    }
}

fn certify(kind: CertifyCommand) -> CliResult {
    let text = match kind {
        CertifyCommand::Spark { a, cap, opts } => {
            spark(&read_matrix::<f64>(a)?, cap, &certify_config(&opts))?.to_json()
        }
        CertifyCommand::Dspark { m, d, cap, opts } => {
            let (op, dict) = read_pair(&m, &d)?;
            d_spark(&op, &dict, cap, &certify_config(&opts))?.to_json()
        }
        CertifyCommand::Rip { a, k, opts } => rip_constant(&read_matrix::<f64>(a)?, k, &certify_config(&opts))?.to_json(),
        CertifyCommand::Drip { m, d, k, opts } => {
            let (op, dict) = read_pair(&m, &d)?;
            drip_constant(&op, &dict, k, &certify_config(&opts))?.to_json()
        }
    };
    println!("{text}");
    Ok(0)
}

fn read_pair(m: &Path, d: &Path) -> Result<(MeasurementOperator<f64>, Dictionary<f64>), Failure> {
    let op = MeasurementOperator::new(read_matrix(m)?)?;
    let dict = Dictionary::new(read_matrix(d)?)?;
    Ok((op, dict))
}

/// The operator, measurements and (when available) the ground-truth instance.
type Problem = (DenseMatrix<f64>, Vec<f64>, Option<ProblemInstance<f64>>);

fn load_problem(src: &ProblemSource) -> Result<Problem, Failure> {
    match (&src.instance, &src.a, &src.y) {
        (Some(dir), _, _) => {
            let bundle = read_bundle(dir)?;
            let a = bundle.instance.effective_operator()?;
            let y = bundle.instance.y().to_vec();
            Ok((a, y, Some(bundle.instance)))
        }
        (None, Some(a), Some(y)) => Ok((read_matrix(a)?, read_vector(y)?, None)),
        _ => Err(Failure::usage("give either --instance or both --A and --y")),
    }
}

fn recovery_json(alpha: &[f64], truth: &Option<ProblemInstance<f64>>) -> Result<Value, Failure> {
    Ok(match truth {
        Some(inst) => {
            let r = assess_recovery(alpha, inst, DEFAULT_RECOVERY_RTOL, DEFAULT_RECOVERY_RTOL)?;
            json!({"rep_error": r.rep_error, "sig_error": r.sig_error})
        }
        None => Value::Null,
    })
}

fn solve(kind: SolveCommand) -> CliResult {
    match kind {
        SolveCommand::L0 {
            src,
            k_max,
            eps,
            all,
            budget,
        } => {
            let (a, y, truth) = load_problem(&src)?;
            let eps = eps.unwrap_or_else(|| truth.as_ref().map_or(0.0, |t| t.epsilon()));
            let sol = solve_l0_with_budget(&a, &y, eps, k_max, all, budget)?;
            let first = sol.minimizers[0].densify();
            write_vector(&src.out, &first)?;
            let minimizers = sol
                .minimizers
                .iter()
                .zip(&sol.residuals)
                .map(|(s, &res)| {
                    Ok(json!({
                        "support": s.support(),
                        "values": s.values(),
                        "residual": res,
                        "recovery": recovery_json(&s.densify(), &truth)?,
                    }))
                })
                .collect::<Result<Vec<Value>, Failure>>()?;
            print_json(&json!({
                "kind": "l0",
                "cardinality": sol.cardinality,
                "count": sol.minimizers.len(),
                "minimizers": minimizers,
                "budget_used": sol.budget_used,
                "out": src.out,
            }));
            Ok(0)
        }
        SolveCommand::L1 {
            src,
            eps,
            feas_tol,
            obj_tol,
            max_iterations,
        } => {
            let params = SolverParams {
                feas_tol,
                obj_tol,
                max_iterations,
                epsilon: eps,
            };
            params.validate()?;
            let (a, y, truth) = load_problem(&src)?;
            let sol = solve_l1(&a, &y, &params)?;
            write_vector(&src.out, &sol.alpha_hat)?;
            print_json(&json!({
                "kind": "l1",
                "objective": sol.objective,
                "residual": sol.feasibility_residual,
                "iterations": sol.iterations,
                "converged": sol.converged,
                "recovery": recovery_json(&sol.alpha_hat, &truth)?,
                "out": src.out,
            }));
            if sol.converged {
                Ok(0)
            } else {
                eprintln!("error: l1 solver did not converge; best iterate written");
                Ok(4)
            }
        }
    }
}

fn phase(a: PhaseArgs) -> CliResult {
    let text = std::fs::read_to_string(&a.config).map_err(Error::from)?;
    let config = PhaseGridConfig::from_json(&text).map_err(|e| Failure::usage(format!("config: {e}")))?;
    let cells = run_phase_grid(&config)?;
    write_phase_csv(&a.out, &cells)?;
    let dnf: usize = cells.iter().map(|c| c.solver_dnf_count).sum();
    if dnf > 0 {
        eprintln!("warning: {dnf} trials did not converge (counted as failures)");
    }
    print_json(&json!({"out": a.out, "cells": cells.len(), "solver_dnf": dnf}));
    Ok(0)
}

fn verify(suite: VerifyCommand) -> CliResult {
    let report: SuiteReport = match suite {
        VerifyCommand::Uniqueness(s) => verify_uniqueness_suite(s.instances, s.seed)?,
        VerifyCommand::Stability { args, eps } => verify_stability_suite(args.instances, args.seed, eps)?,
        VerifyCommand::Representation { args, eps } => verify_representation_suite(args.instances, args.seed, eps)?,
    };
    println!("{}", report.to_json());
    Ok(if report.passed() { 0 } else { 5 })
}
