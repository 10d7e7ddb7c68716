//! Command-line front end for `taubounds`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or flags.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use taubounds::{
    analyze, population_bounds, simulate_dataset, AnalysisOptions, BenchmarkScenario, CopulaSpec,
    CovariateScale, MarginMode, MgpConfig, ThetaConstraint,
};

pub mod data;
pub mod report;
pub mod reproduce;

pub const WORKERS_ENV: &str = "TAUBOUNDS_WORKERS";
const MIN_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed input, bad flags or an unsupported combination.
    Validation(String),
    Io(String),
    /// A bug: an emitted report failed its own schema.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<taubounds::Error> for CliError {
    fn from(e: taubounds::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "taubounds", version, about = "Bounds on Kendall's tau when data are missing")]
pub struct Cli {
    /// Worker threads for Monte Carlo work; results do not depend on it.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Identified sets for tau from an `x,y` CSV.
    Analyze(AnalyzeArgs),
    /// Simulate an incomplete dataset from a missingness model.
    Simulate(SimulateArgs),
    /// Population bounds for the benchmark scenarios against reference values.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginsArg {
    Uniform01,
    File,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Uniform01,
    NormalScore,
}

impl From<ScaleArg> for CovariateScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Uniform01 => CovariateScale::Uniform01,
            ScaleArg::NormalScore => CovariateScale::NormalScore,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Report destination; stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "uniform01")]
    pub margins: MarginsArg,
    /// `value,cdf` table for X (with `--margins file`).
    #[arg(long)]
    pub x_cdf: Option<PathBuf>,
    #[arg(long)]
    pub y_cdf: Option<PathBuf>,
    /// Side information C(1/2, 1/2) = theta, in [0, 1/2].
    #[arg(long)]
    pub theta: Option<f64>,
    /// Require the interval to clear zero by this many standard errors.
    #[arg(long, default_value_t = 0.0)]
    pub guard_k: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, conflicts_with_all = ["rho", "gamma"])]
    pub scenario: Option<String>,
    /// Latent Gaussian correlation; ±1 gives the degenerate copulas.
    #[arg(long, requires = "gamma", allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// `zeros`, or eight comma-separated logit coefficients, two per pattern.
    #[arg(long, requires = "rho", allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, value_enum, default_value = "uniform01")]
    pub covariate_scale: ScaleArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset destination; stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write population bounds for the model as JSON.
    #[arg(long)]
    pub population_report: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    /// Defaults to the scenario's theta, or 0.4.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 10_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Absolute tolerance against the reference values.
    #[arg(long, default_value_t = reproduce::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Use the strict tolerance (0.005).
    #[arg(long, conflicts_with = "tolerance")]
    pub strict: bool,
    #[arg(long, value_enum, default_value = "plain")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_path<T>(
    path: &Path,
    parse: impl FnOnce(BufReader<File>) -> Result<T, CliError>,
) -> Result<T, CliError> {
    parse(open(path)?).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush().map_err(io_err)
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    write_output(path, |w| w.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())))
}

fn theta_arg(theta: Option<f64>) -> Result<Option<ThetaConstraint>, CliError> {
    theta.map(ThetaConstraint::new).transpose().map_err(CliError::from)
}

fn margins(args: &AnalyzeArgs) -> Result<MarginMode, CliError> {
    let tables_given = args.x_cdf.is_some() || args.y_cdf.is_some();
    match args.margins {
        MarginsArg::File => match (&args.x_cdf, &args.y_cdf) {
            (Some(x), Some(y)) => Ok(MarginMode::KnownFromFile {
                x: read_path(x, data::read_cdf_table)?,
                y: read_path(y, data::read_cdf_table)?,
            }),
            _ => Err(CliError::Validation(
                "--margins file needs both --x-cdf and --y-cdf".into(),
            )),
        },
        _ if tables_given => Err(CliError::Validation(
            "--x-cdf/--y-cdf are only used with --margins file".into(),
        )),
        MarginsArg::Uniform01 => Ok(MarginMode::KnownUniform01),
        MarginsArg::Unknown => Ok(MarginMode::Unknown),
    }
}

pub fn run_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    if !(args.guard_k.is_finite() && args.guard_k >= 0.0) {
        return Err(CliError::Validation(format!(
            "--guard-k must be a nonnegative number, got {}",
            args.guard_k
        )));
    }
    let theta = theta_arg(args.theta)?;
    let margins = margins(args)?;
    if theta.is_some() && margins == MarginMode::Unknown {
        return Err(CliError::Validation("theta requires known margins".into()));
    }
    let records = read_path(&args.input, data::read_records)?;
    let options = AnalysisOptions {
        guard_k: args.guard_k,
        seed: args.seed,
    };
    let rep = analyze(&records, &margins, theta, &options)?;
    let text = match args.format {
        Format::Json => report::to_json(&rep)?,
        Format::Plain => report::to_plain(&rep),
    };
    write_text(args.output.as_deref(), &text)
}

pub fn parse_gamma(text: &str) -> Result<[[f64; 2]; 4], CliError> {
    if text.trim() == "zeros" {
        return Ok([[0.0; 2]; 4]);
    }
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("--gamma: cannot parse `{}`", t.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != 8 {
        return Err(CliError::Validation(format!(
            "--gamma needs 8 coefficients (4 patterns x 2), got {}",
            values.len()
        )));
    }
    Ok(std::array::from_fn(|z| [values[2 * z], values[2 * z + 1]]))
}

fn simulate_config(args: &SimulateArgs) -> Result<(MgpConfig, f64), CliError> {
    let scale = CovariateScale::from(args.covariate_scale);
    match (&args.scenario, args.rho, &args.gamma) {
        (Some(name), _, _) => {
            let s = BenchmarkScenario::parse(name).ok_or_else(|| {
                CliError::Validation(format!("unknown scenario `{name}` (expected P1, P2 or P3)"))
            })?;
            Ok((s.config(scale), BenchmarkScenario::THETA))
        }
        (None, Some(rho), Some(gamma)) => {
            let copula = CopulaSpec::from_correlation(rho)?;
            let cfg = MgpConfig::new(parse_gamma(gamma)?, copula, scale)?;
            Ok((cfg, BenchmarkScenario::THETA))
        }
        _ => Err(CliError::Validation(
            "give either --scenario or both --rho and --gamma".into(),
        )),
    }
}

#[derive(serde::Serialize)]
struct PopulationOut {
    draws: usize,
    seed: u64,
    theta: f64,
    covariate_scale: &'static str,
    p: [f64; 4],
    p_se: [f64; 4],
    worst_case: reproduce::IntervalOut,
    refined: reproduce::IntervalOut,
    theta_dgp: f64,
    theta_dgp_se: f64,
    theta_warning: Option<String>,
    tool_version: &'static str,
}

pub fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let (cfg, default_theta) = simulate_config(args)?;
    let records = simulate_dataset(&cfg, args.n, args.seed)?;
    write_output(args.output.as_deref(), |w| data::write_records(&records, w))?;
    if let Some(path) = &args.population_report {
        if args.draws < MIN_DRAWS {
            return Err(CliError::Validation(format!(
                "--draws must be at least {MIN_DRAWS}, got {}",
                args.draws
            )));
        }
        let theta = theta_arg(Some(args.theta.unwrap_or(default_theta)))?.expect("theta given");
        let pop = population_bounds(&cfg, theta, args.draws, args.seed)?;
        let out = PopulationOut {
            draws: pop.draws,
            seed: pop.seed,
            theta: theta.value(),
            covariate_scale: cfg.covariate_scale.as_str(),
            p: pop.p,
            p_se: pop.p_se,
            worst_case: (&pop.worst_case).into(),
            refined: (&pop.refined).into(),
            theta_dgp: pop.theta_dgp.value,
            theta_dgp_se: pop.theta_dgp.se,
            theta_warning: pop.theta_warning.clone(),
            tool_version: report::TOOL_VERSION,
        };
        let text = serde_json::to_string_pretty(&out).map_err(|e| CliError::Internal(e.to_string()))?;
        write_text(Some(path), &(text + "\n"))?;
    }
    Ok(())
}

pub fn run_reproduce(args: &ReproduceArgs) -> Result<(), CliError> {
    if args.draws < MIN_DRAWS {
        return Err(CliError::Validation(format!(
            "--draws must be at least {MIN_DRAWS}, got {}",
            args.draws
        )));
    }
    let tolerance = if args.strict {
        reproduce::STRICT_TOLERANCE
    } else {
        args.tolerance
    };
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(CliError::Validation(format!(
            "--tolerance must be a nonnegative number, got {tolerance}"
        )));
    }
    let rep = reproduce::run(args.draws, args.seed, tolerance)?;
    let text = match args.format {
        Format::Json => {
            serde_json::to_string_pretty(&rep).map_err(|e| CliError::Internal(e.to_string()))? + "\n"
        }
        Format::Plain => reproduce::to_plain(&rep),
    };
    write_text(args.output.as_deref(), &text)
}

/// Run a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Validation("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    taubounds::parallel::with_workers(workers, || match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Reproduce(a) => run_reproduce(a),
    })
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
