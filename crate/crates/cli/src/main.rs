use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

mod commands;
mod input;
mod output;

#[derive(Parser, Debug)]
#[command(name = "ridge-mml", version, about = "Marginal maximum likelihood ridge regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the shrinkage parameter(s) and report the posterior fit.
    Fit(FitArgs),
    /// Run several estimators on one dataset and tabulate them.
    Compare(CompareArgs),
    /// Evaluate the log marginal likelihood (or a criterion) over a grid.
    Curve(CurveArgs),
    /// Run the simulation study and summarize the ROC statistics.
    Simulate(SimulateArgs),
    /// Posterior predictive distribution at new covariate rows.
    Predict(PredictArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rr,
    Prr,
    Grr,
}

impl From<ModelArg> for ridge_mml::Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Rr => ridge_mml::Model::Rr,
            ModelArg::Prr => ridge_mml::Model::Prr,
            ModelArg::Grr => ridge_mml::Model::Grr,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Mml,
    Hkb,
    HkbExt,
    Gcv,
    Bic,
    Aic,
    Cv10,
    Gibbs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CiScoreArg {
    /// Two-sided: St(|β̄|/√ṽ).
    Absolute,
    /// One-sided: St(β̄/√ṽ).
    Signed,
}

impl From<CiScoreArg> for ridge_mml::CiScore {
    fn from(c: CiScoreArg) -> Self {
        match c {
            CiScoreArg::Absolute => ridge_mml::CiScore::Absolute,
            CiScoreArg::Signed => ridge_mml::CiScore::Signed,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StandardizeArg {
    Variance,
    Ss,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpandArg {
    None,
    Quadratic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Response column, by name or 0-based index.
    #[arg(long)]
    pub response: String,
    /// Columns to ignore, by name or index (repeatable).
    #[arg(long)]
    pub drop: Vec<String>,
    #[arg(long, value_enum, default_value_t = StandardizeArg::Variance)]
    pub standardize: StandardizeArg,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub scale_y: bool,
    /// Basis expansion applied to the standardized covariates.
    #[arg(long, value_enum, default_value_t = ExpandArg::None)]
    pub expand: ExpandArg,
    #[arg(long, default_value_t = 0.001)]
    pub a: f64,
    #[arg(long, default_value_t = 0.001)]
    pub b: f64,
}

#[derive(Args, Debug, Clone)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Rr)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Mml)]
    pub estimator: EstimatorArg,
    /// Upper end of the GCV/BIC/AIC grid.
    #[arg(long, default_value_t = 500.0)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 0.005)]
    pub grid_step: f64,
    /// Number of nonzero points in the CV10 grid.
    #[arg(long, default_value_t = 100)]
    pub cv_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gibbs sweeps, burn-in included.
    #[arg(long, default_value_t = 110_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Leave wall-clock timings out so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated subset of rr, prr, grr, hkb, hkb-ext, gcv, bic, aic, cv10, gibbs.
    #[arg(long, value_delimiter = ',', default_value = "rr,prr,grr,hkb,hkb-ext,gcv,bic,aic,cv10")]
    pub estimators: Vec<String>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Rr)]
    pub model: ModelArg,
    /// `mml` evaluates the log marginal likelihood; gcv, bic and aic evaluate that criterion.
    #[arg(long, value_enum, default_value_t = EstimatorArg::Mml)]
    pub estimator: EstimatorArg,
    /// First grid value; defaults to the step.
    #[arg(long)]
    pub grid_min: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub grid_step: f64,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta_step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Comma-separated template names (Iris, DiabetesQ, DiabetesS, Teacher, ...).
    #[arg(long, value_delimiter = ',', default_value = "Iris")]
    pub templates: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.75")]
    pub zero_proportions: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub replications: usize,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "rr,prr,grr")]
    pub models: Vec<ModelArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.001)]
    pub a: f64,
    #[arg(long, default_value_t = 0.001)]
    pub b: f64,
    /// Score ranked for the credible-interval criteria.
    #[arg(long, value_enum, default_value = "absolute")]
    pub ci_score: CiScoreArg,
    /// Also write one JSON line per replication, model and criterion.
    #[arg(long)]
    pub detail: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// CSV with the training covariate columns (by name) for the new rows.
    #[arg(long)]
    pub new: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn configure_threads() -> ridge_mml::Result<()> {
    let Ok(value) = std::env::var("RIDGE_MML_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| ridge_mml::Error::InvalidArgument(format!("RIDGE_MML_THREADS={value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ridge_mml::Error::InvalidArgument(e.to_string()))
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let doc = json!({ "schema": output::SCHEMA, "error": { "kind": kind, "message": message } });
    println!("{}", serde_json::to_string_pretty(&doc).expect("error document serializes"));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("UsageError", e.to_string().trim()),
    };
    if let Err(e) = configure_threads() {
        return fail(e.kind(), &e.to_string());
    }
    let result = match cli.command {
        Command::Fit(args) => commands::fit(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Curve(args) => commands::curve(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Predict(args) => commands::predict(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
