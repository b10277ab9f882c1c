use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use polycert::bench::{rows_to_json, run_bench, solve_problem, write_csv, BenchConfig, Hierarchy, SolveError, SolveSettings};
use polycert::certificate::Certificate;
use polycert::conic::SolverStatus;
use polycert::hierarchies::HierarchyOptions;
use polycert::problem::{gen_instance, Problem};
use polycert::verify::{verify_for_problem, Verdict};

const EXIT_PARSE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VERIFY: u8 = 4;

/// Certificates of non-negativity and bounds for polynomial optimization.
#[derive(Parser)]
#[command(name = "polycert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a lower bound at one rank of a hierarchy.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Search for a certificate at one rank and write it out.
    Certify {
        #[command(flatten)]
        run: RunArgs,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a certificate against a problem.
    Verify {
        certificate: PathBuf,
        problem: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random sparse instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "obj-deg", default_value_t = 2)]
        obj_deg: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a grid of hierarchies, ranks and cases from a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// CSV output (overrides the config; stdout when neither is set).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    hierarchy: Hierarchy,
    #[arg(long)]
    rank: u32,
    #[arg(long = "sigma0-deg")]
    sigma0_deg: Option<u32>,
    #[arg(long)]
    m1: Option<usize>,
    /// Solver time limit in seconds.
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    /// Refuse programs with more stored entries than this.
    #[arg(long = "max-entries")]
    max_entries: Option<usize>,
    problem: PathBuf,
}

impl RunArgs {
    fn settings(&self, certificate: bool) -> SolveSettings {
        SolveSettings {
            deg_sigma0: self.sigma0_deg,
            m1: self.m1,
            certificate,
            hierarchy: HierarchyOptions {
                time_limit: self.time_limit,
                max_entries: self.max_entries,
                ..Default::default()
            },
        }
    }
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

type Outcome = Result<(), Failure>;

/// Missing or inconsistent problem data is an input error, anything else
/// a solver failure.
fn solve_failure(e: SolveError) -> Failure {
    let code = match e {
        SolveError::Problem(_) => EXIT_PARSE,
        SolveError::Hierarchy(_) => EXIT_SOLVER,
    };
    Failure { code, error: e.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(fail(EXIT_PARSE))
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    Problem::parse(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(fail(EXIT_PARSE))
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
    .map_err(fail(1))
}

fn solve(run: &RunArgs, json: bool) -> Outcome {
    let prob = load_problem(&run.problem)?;
    let res = solve_problem(&prob, run.hierarchy, run.rank, &run.settings(false))
        .map_err(solve_failure)?;
    if json {
        println!("{}", res.to_json());
    } else {
        println!("hierarchy {} rank {}", res.hierarchy, res.rank);
        println!("status {}", res.status.as_str());
        println!("bound {}", res.bound_text());
        eprintln!("time {:.3} s", res.wall_time);
        if let Some(h) = &res.heuristic {
            println!("strong positivity ({}): {}", h.label, if h.passed() { "no witness" } else { "witness found" });
        }
    }
    match res.status {
        SolverStatus::Optimal | SolverStatus::Infeasible => Ok(()),
        s => Err(fail(EXIT_SOLVER)(anyhow::anyhow!("solver status {}", s.as_str()))),
    }
}

fn certify(run: &RunArgs, output: Option<&Path>) -> Outcome {
    let prob = load_problem(&run.problem)?;
    if run.hierarchy == Hierarchy::Copositive {
        return Err(fail(EXIT_PARSE)(anyhow::anyhow!("the copositive route does not emit certificate files")));
    }
    let res = solve_problem(&prob, run.hierarchy, run.rank, &run.settings(true))
        .map_err(solve_failure)?;
    if !matches!(res.status, SolverStatus::Optimal | SolverStatus::Infeasible) {
        return Err(fail(EXIT_SOLVER)(anyhow::anyhow!("solver status {}", res.status.as_str())));
    }
    let verified = res.certificate.and_then(|cert| {
        let report = verify_for_problem(&cert, &prob).ok()?;
        match report.verdict {
            Verdict::Fail => {
                log::warn!("rounded certificate rejected: {}", report.to_json());
                None
            }
            v => Some((cert, v)),
        }
    });
    match verified {
        Some((cert, v)) => {
            eprintln!("certificate for lambda = {} ({})", polycert::poly::format_rational(cert.lambda()), v.as_str());
            emit(output, &cert.to_json())
        }
        None => {
            println!("none at rank {}", run.rank);
            Ok(())
        }
    }
}

fn verify(cert_path: &Path, prob_path: &Path, json: bool) -> Outcome {
    let cert = Certificate::from_json(&read(cert_path)?)
        .with_context(|| format!("parsing {}", cert_path.display()))
        .map_err(fail(EXIT_PARSE))?;
    let prob = load_problem(prob_path)?;
    let report = verify_for_problem(&cert, &prob).map_err(|e| fail(EXIT_PARSE)(e.into()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("json"));
    } else {
        println!("{}", report.verdict.as_str());
        if let Some((m, c)) = report.offending_monomial() {
            println!("residual: {} terms, largest {} at {:?}", report.identity_residual.len(), c, m.0);
        }
        for a in report.admissibility.iter().filter(|a| a.verdict != Verdict::ExactPass) {
            println!("{}: {} ({})", a.name, a.verdict.as_str(), a.reason);
        }
    }
    match report.verdict {
        Verdict::Fail => Err(fail(EXIT_VERIFY)(anyhow::anyhow!("verification failed"))),
        _ => Ok(()),
    }
}

fn gen(n: usize, seed: u64, obj_deg: u32, output: Option<&Path>) -> Outcome {
    let prob = gen_instance(n, seed, obj_deg).map_err(|e| fail(EXIT_PARSE)(e.into()))?;
    emit(output, &prob.to_json())
}

fn bench(config: &Path, csv: Option<PathBuf>, json: Option<PathBuf>) -> Outcome {
    let cfg = BenchConfig::parse(&read(config)?)
        .with_context(|| format!("parsing {}", config.display()))
        .map_err(fail(EXIT_PARSE))?;
    let base = config.parent().unwrap_or(Path::new("."));
    let rows = run_bench(&cfg, base);
    let csv_path = csv.or_else(|| cfg.csv.as_ref().map(|p| base.join(p)));
    let json_path = json.or_else(|| cfg.json.as_ref().map(|p| base.join(p)));
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| fail(1)(e.into()))?;
    emit(csv_path.as_deref(), &String::from_utf8(buf).expect("utf-8"))?;
    if let Some(p) = json_path {
        emit(Some(&p), &rows_to_json(&rows))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Solve { run, json } => solve(run, *json),
        Command::Certify { run, output } => certify(run, output.as_deref()),
        Command::Verify { certificate, problem, json } => verify(certificate, problem, *json),
        Command::Gen { n, seed, obj_deg, output } => gen(*n, *seed, *obj_deg, output.as_deref()),
        Command::Bench { config, csv, json } => bench(config, csv.clone(), json.clone()),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
