//! `segmental`: estimate arm-level outcome probabilities from segmental
//! trial data, draw posterior and risk-reduction curves, and run
//! simulation studies.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod curves;
mod estimate;
mod fail;
mod fit;
mod input;
mod output;
mod simulate;
mod svg;

use fail::CliError;

#[derive(Parser, Debug)]
#[command(name = "segmental", version, about = "Prior and posterior outcome probabilities from segmental trials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit log-Gaussian test distributions per outcome stratum.
    Fit(FitArgs),
    /// Estimate each arm's prior outcome probability from its segment.
    Estimate(EstimateArgs),
    /// Posterior probability and absolute risk reduction curves.
    Curves(CurvesArgs),
    /// Monte Carlo comparison of segmental and randomised estimates.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Irma2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reconstruct {
    Midpoint,
    ModelConditional,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DataArgs {
    /// Subject (aer,arm,outcome[,outcome_value]) or bin (lo,hi,arm,events,total) CSV.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub data: Option<PathBuf>,
    /// Use an embedded dataset.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Label of the control arm.
    #[arg(long, default_value = "placebo")]
    pub control: String,
    /// Eligibility range of the baseline test, `lo,hi`.
    #[arg(long, value_name = "LO,HI")]
    pub eligibility: Option<String>,
    /// Threshold on outcome_value that defines the outcome.
    #[arg(long)]
    pub outcome_threshold: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Directory for output files; nothing is written when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fit only subjects inside their arm's segment (control at or below,
    /// treatment above). Defaults to 80 for the embedded dataset.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Fit every subject regardless of segment.
    #[arg(long, conflicts_with = "threshold")]
    pub all_subjects: bool,
    /// How to expand aggregate bins into subject values.
    #[arg(long, value_enum)]
    pub reconstruct: Option<Reconstruct>,
    /// Model used to draw values for model-conditional reconstruction.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Count,
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodArg {
    /// Tabulated counts shipped with the embedded dataset.
    Published,
    /// Solved from segment counts and arm enrolment.
    Shared,
    /// Counted across all arms and the full range.
    Pooled,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Segment split on the test scale. Defaults to 80 for the embedded dataset.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "count")]
    pub method: MethodArg,
    /// Source of the dichotomous likelihoods for the count method.
    #[arg(long, value_enum)]
    pub likelihoods: Option<LikelihoodArg>,
    /// Lower-tail areas `with,without` at the threshold for the tail method.
    #[arg(long, value_name = "A,B")]
    pub tail_areas: Option<String>,
    /// Outcome model JSON for the tail method.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Bootstrap replicates for prior intervals (0 = none, else >= 1000).
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CurvesArgs {
    /// Outcome model JSON, as written by `fit`.
    #[arg(long, required_unless_present = "builtin")]
    pub model: Option<PathBuf>,
    /// Use the embedded dataset's tabulated segmental model.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Prior estimates JSON, as written by `estimate`.
    #[arg(long)]
    pub priors: PathBuf,
    /// Grid `lo,hi,step` on the test scale.
    #[arg(long, value_name = "LO,HI,STEP", default_value = "20,200,1")]
    pub grid: String,
    /// Skip the dashed curves from full-range observed proportions.
    #[arg(long)]
    pub no_observed: bool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    /// Simulation configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => fit::run(&a),
        Command::Estimate(a) => estimate::run(&a),
        Command::Curves(a) => curves::run(&a),
        Command::Simulate(a) => simulate::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
