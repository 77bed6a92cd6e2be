//! `mvprobit`: simulate, shard, fit and combine multivariate probit models.
//!
//! Exit status is 0 on success, 2 on a usage error and 1 on a runtime
//! error. Runtime errors print one JSON object with `kind` and `message` to
//! standard error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvprobit::sim::{Linkage, PointEstimator};
use mvprobit::CombineMethod;

#[derive(Parser)]
#[command(name = "mvprobit", version, about = "Divide-and-conquer MCMC for the multivariate probit model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset and its ground truth.
    Simulate(SimulateArgs),
    /// Partition a dataset into shard files and a plan.
    Split(SplitArgs),
    /// Fit one shard and write its posterior summary.
    Fit(FitArgs),
    /// Combine shard summaries into one posterior.
    Combine(CombineArgs),
    /// Simulate or load, split, fit every shard and combine.
    Pipeline(PipelineArgs),
    /// Score combined summaries against ground truth.
    Metrics(MetricsArgs),
    /// Cluster responses on the median correlation matrix.
    Cluster(ClusterArgs),
    /// Flag responses whose 95% interval for a predictor excludes zero.
    Screen(ScreenArgs),
}

#[derive(Args, Clone)]
struct DesignArgs {
    /// Number of rows.
    #[arg(long)]
    n: usize,
    /// Number of binary responses.
    #[arg(long)]
    m: usize,
    /// Number of predictors, counting the intercept.
    #[arg(long)]
    p: usize,
    /// Factors in the generating covariance [default: the fitted factor count, or 2].
    #[arg(long)]
    true_factors: Option<usize>,
    /// Omit the intercept column.
    #[arg(long)]
    no_intercept: bool,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset output path.
    #[arg(long)]
    data: PathBuf,
    /// Ground-truth output path.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args, Clone, Copy)]
#[group(required = true, multiple = false)]
struct ShardArgs {
    /// Number of shards.
    #[arg(long)]
    shards: Option<usize>,
    /// Target rows per shard; the shard count is ceil(n / size).
    #[arg(long)]
    shard_size: Option<usize>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    shards: ShardArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for shard files and plan.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Number of latent factors K.
    #[arg(long)]
    factors: usize,
    #[arg(long, default_value_t = 2000)]
    iter: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Prior variance of coefficients and loadings.
    #[arg(long, default_value_t = 1e6)]
    prior_variance: f64,
    /// Comma-separated quantile levels; must include 0.025, 0.5 and 0.975.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Keep raw draws in a sidecar file (needed by `combine --method cmc`).
    #[arg(long)]
    keep_draws: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Shard dataset file.
    #[arg(long)]
    shard: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Data proportion of this shard.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Random stream of this shard; use the shard index.
    #[arg(long, default_value_t = 0)]
    stream_id: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Cmc,
    Pie,
}

impl From<MethodArg> for CombineMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cmc => CombineMethod::Cmc,
            MethodArg::Pie => CombineMethod::Pie,
        }
    }
}

#[derive(Args)]
struct CombineArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    out: PathBuf,
    /// Shard summary files.
    #[arg(required = true)]
    summaries: Vec<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Existing dataset; simulated from --n/--m/--p when absent.
    #[arg(long, conflicts_with_all = ["n", "m", "p"])]
    data: Option<PathBuf>,
    #[arg(long, required_unless_present = "data")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "data")]
    m: Option<usize>,
    #[arg(long, required_unless_present = "data")]
    p: Option<usize>,
    #[arg(long)]
    true_factors: Option<usize>,
    #[arg(long)]
    no_intercept: bool,
    #[command(flatten)]
    shards: ShardArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shard chains run at once.
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Median,
    Mean,
}

impl From<EstimatorArg> for PointEstimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Median => PointEstimator::Median,
            EstimatorArg::Mean => PointEstimator::Mean,
        }
    }
}

#[derive(Args)]
struct MetricsArgs {
    /// Combined summary files, one per replicate.
    #[arg(long = "summary", required = true)]
    summaries: Vec<PathBuf>,
    /// Truth files, paired with the summaries in order.
    #[arg(long = "truth", required = true)]
    truths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "median")]
    estimator: EstimatorArg,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkageArg {
    Average,
    Complete,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Average => Linkage::Average,
            LinkageArg::Complete => Linkage::Complete,
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    summary: PathBuf,
    #[arg(long, value_enum, default_value = "average")]
    linkage: LinkageArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScreenArgs {
    #[arg(long)]
    summary: PathBuf,
    /// Predictor name as it appears in the summary.
    #[arg(long)]
    predictor: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "kind": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(1)
        }
    }
}
