//! Command-line front end. Each subcommand builds the same JSON request the
//! service accepts and prints the response.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use argstrength_core::correction::CostPreset;
use argstrength_core::evalharness::{emit_csv, run_experiment, summarize, ExperimentConfig};
use argstrength_core::rationality::DEFAULT_CORNER_LIMIT;
use argstrength_core::semantics::Semantics;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::api::{handle, ApiError, Operation, DEFAULT_EPS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "argstrength", version, about = "Elicit argument strengths from degree intervals")]
pub struct Cli {
    /// Write the result here instead of standard output (CSV for `eval`).
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Hbs,
    Car,
    Max,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Hbs => Semantics::Hbs,
            SemanticsArg::Car => Semantics::Car,
            SemanticsArg::Max => Semantics::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CostArg {
    Unit,
    OriginLine,
    Custom,
}

impl From<CostArg> for CostPreset {
    fn from(c: CostArg) -> Self {
        match c {
            CostArg::Unit => CostPreset::Unit,
            CostArg::OriginLine => CostPreset::OriginLine,
            CostArg::Custom => CostPreset::Custom,
        }
    }
}

#[derive(Debug, Args)]
struct Input {
    /// Framework document (JSON).
    file: PathBuf,
    #[arg(long, value_enum, default_value = "hbs")]
    semantics: SemanticsArg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Acceptability degrees of a weighted framework.
    Solve(Input),
    /// Weights producing given degrees, and whether they are achievable.
    Invert {
        #[command(flatten)]
        input: Input,
        /// Degrees as a JSON object `{"id": degree}` or a path to one.
        #[arg(long)]
        degrees: String,
    },
    /// Rational / fully rational / irrational verdict with corner diagnostics.
    Check {
        #[command(flatten)]
        input: Input,
        /// Also decide ε-rationality at this ε.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_CORNER_LIMIT)]
        corner_limit: usize,
        /// Cross-check card-based verdicts by dense sampling (up to 6 arguments).
        #[arg(long)]
        verify_car: bool,
    },
    /// Tighten unreachable upper bounds.
    Refine {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Lower interval minima of an irrational framework at minimal cost.
    Correct {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        strategy: u8,
        #[arg(long, value_enum, default_value = "custom")]
        costs: CostArg,
        /// Largest subset size explored by strategy 2.
        #[arg(long)]
        max_subset_args: Option<usize>,
    },
    /// Sample initial weights whose degrees satisfy the intervals.
    Sample {
        #[command(flatten)]
        input: Input,
        #[arg(short = 'n', long = "count", default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 100)]
        max_tries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the random-instance benchmark of both correction strategies.
    Eval {
        /// Experiment configuration (JSON); defaults apply to missing fields.
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Serve the JSON API over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

enum Failure {
    Usage(String),
    Api(ApiError),
    Other(String),
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        Failure::Api(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Api(ApiError::bad_request(format!("{}: {e}", path.display()))))
}

fn request(input: &Input, params: Value) -> Result<Value, Failure> {
    let mut body = params;
    body["framework"] = read_json(&input.file)?;
    body["semantics"] = json!(Semantics::from(input.semantics));
    Ok(body)
}

fn degrees_arg(raw: &str) -> Result<Value, Failure> {
    match serde_json::from_str::<Value>(raw) {
        Ok(v) if v.is_object() => Ok(v),
        _ => read_json(Path::new(raw)),
    }
}

fn emit(output: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    match output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure::Other(e.to_string()))
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let output = cli.output.as_deref();
    let (op, body) = match cli.command {
        Command::Solve(input) => (Operation::Solve, request(&input, json!({}))?),
        Command::Invert { input, degrees } => (
            Operation::Invert,
            request(&input, json!({ "degrees": degrees_arg(&degrees)? }))?,
        ),
        Command::Check {
            input,
            eps,
            corner_limit,
            verify_car,
        } => {
            let mut params = json!({ "corner_limit": corner_limit, "verify_car": verify_car });
            if let Some(eps) = eps {
                params["eps"] = json!(eps);
            }
            (Operation::Rationality, request(&input, params)?)
        }
        Command::Refine { input, eps } => (Operation::Refine, request(&input, json!({ "eps": eps }))?),
        Command::Correct {
            input,
            eps,
            strategy,
            costs,
            max_subset_args,
        } => (
            Operation::Correct,
            request(
                &input,
                json!({
                    "eps": eps,
                    "strategy": strategy,
                    "costs": CostPreset::from(costs),
                    "max_subset_args": max_subset_args,
                }),
            )?,
        ),
        Command::Sample {
            input,
            count,
            max_tries,
            seed,
        } => (
            Operation::Sample,
            request(&input, json!({ "n": count, "max_tries": max_tries, "seed": seed }))?,
        ),
        Command::Eval {
            config,
            seed,
            n_min,
            n_max,
            runs,
        } => return eval(output, config.as_deref(), seed, n_min, n_max, runs),
        Command::Serve { port } => return serve(port),
    };
    let result = handle(op, body)?;
    emit(output, &result)
}

fn eval(
    output: Option<&Path>,
    config: Option<&Path>,
    seed: Option<u64>,
    n_min: Option<usize>,
    n_max: Option<usize>,
    runs: Option<usize>,
) -> Result<(), Failure> {
    let mut cfg: ExperimentConfig = match config {
        Some(path) => serde_json::from_value(read_json(path)?)
            .map_err(|e| Failure::Api(ApiError::bad_request(format!("experiment config: {e}"))))?,
        None => ExperimentConfig::default(),
    };
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.n_min = n_min.unwrap_or(cfg.n_min);
    cfg.n_max = n_max.unwrap_or(cfg.n_max);
    cfg.runs_per_n = runs.unwrap_or(cfg.runs_per_n);

    let rows = run_experiment(&cfg).map_err(|e| Failure::Other(e.to_string()))?;
    let mut report = json!({
        "status": "ok",
        "config": cfg,
        "rows": rows.len(),
        "summary": summarize(&rows),
    });
    match output {
        Some(path) => {
            emit_csv(&rows, path).map_err(|e| Failure::Other(e.to_string()))?;
            report["csv"] = json!(path.display().to_string());
        }
        None => report["records"] = json!(rows),
    }
    emit(None, &report)
}

fn serve(port: u16) -> Result<(), Failure> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Other(e.to_string()))?;
    runtime
        .block_on(crate::service::serve(port))
        .map_err(|e| Failure::Other(format!("service failed: {e}")))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Api(err)) => {
            eprintln!("error: {err}");
            println!("{}", err.body());
            EXIT_DOMAIN
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DOMAIN
        }
    }
}
