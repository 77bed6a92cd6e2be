use super::metrics::{compute_coverage, compute_mae, compute_mse, mean_interval_width, MetricReport};
use super::simulate::{simulate_dataset, SimConfig, SimTruth};
use crate::combine::{cmc_combine, pie_combine, CombineMethod, CombinedPosterior};
use crate::error::{Error, Result};
use crate::kernels::derive_seed;
use crate::probit::{IdentifiedDraw, ModelConfig};
use crate::shard::{make_shard_plan, run_sharded, ShardMode};
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShardSpec {
    Count(usize),
    /// Fixed shard size; the shard count grows with `n`.
    Size(usize),
}

impl ShardSpec {
    fn mode(self) -> (usize, ShardMode) {
        match self {
            ShardSpec::Count(s) => (s, ShardMode::ByCount),
            ShardSpec::Size(s) => (s, ShardMode::BySize),
        }
    }
}

/// One design point. Every listed combiner is applied to the same shard fits.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkCell {
    pub n: usize,
    pub shards: ShardSpec,
    pub methods: Vec<CombineMethod>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PointEstimator {
    #[default]
    Median,
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkOptions {
    pub replicates: usize,
    /// Number of replicate fits run concurrently.
    pub parallelism: usize,
    pub estimator: PointEstimator,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            replicates: 3,
            parallelism: 1,
            estimator: PointEstimator::Median,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateMetrics {
    pub replicate_id: u64,
    pub mse: f64,
    pub coverage: f64,
    pub mae: f64,
    pub mean_ci_width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub n: usize,
    pub shards: ShardSpec,
    pub n_shards: usize,
    pub method: CombineMethod,
    pub report: MetricReport,
    pub replicates: Vec<ReplicateMetrics>,
}

/// Point estimates and 95% intervals of a combined posterior.
pub(crate) struct Estimates {
    pub point: IdentifiedDraw,
    pub lower: nalgebra::DMatrix<f64>,
    pub upper: nalgebra::DMatrix<f64>,
}

pub(crate) fn estimates(combined: &CombinedPosterior, estimator: PointEstimator) -> Result<Estimates> {
    let table = &combined.quantiles;
    let point = match estimator {
        PointEstimator::Median => table.at_level(0.5)?,
        PointEstimator::Mean => table.at_means(),
    };
    Ok(Estimates {
        point,
        lower: table.at_level(0.025)?.b_tilde,
        upper: table.at_level(0.975)?.b_tilde,
    })
}

fn replicate_metrics(est: &Estimates, truth: &SimTruth, replicate_id: u64) -> Result<ReplicateMetrics> {
    let truths = std::slice::from_ref(truth);
    let intervals = [(est.lower.clone(), est.upper.clone())];
    Ok(ReplicateMetrics {
        replicate_id,
        mse: compute_mse(std::slice::from_ref(&est.point.b_tilde), truths)?,
        coverage: compute_coverage(&intervals, truths)?,
        mae: compute_mae(std::slice::from_ref(&est.point.r), truths)?,
        mean_ci_width: mean_interval_width(&intervals),
    })
}

/// Per-method metrics of one replicate of one cell.
struct ReplicateOutcome {
    n_shards: usize,
    by_method: Vec<ReplicateMetrics>,
}

fn run_replicate(
    cell: &BenchmarkCell,
    base: &ModelConfig,
    sim: &SimConfig,
    replicate: u64,
    estimator: PointEstimator,
) -> Result<ReplicateOutcome> {
    let sim_cfg = SimConfig {
        n: cell.n,
        replicate_id: replicate,
        ..sim.clone()
    };
    let (data, truth) = simulate_dataset(&sim_cfg)?;
    let seed = derive_seed(base.seed, replicate);
    let (s, mode) = cell.shards.mode();
    let plan = make_shard_plan(cell.n, s, mode, seed)?;
    let config = ModelConfig {
        seed,
        keep_draws: base.keep_draws || cell.methods.contains(&CombineMethod::Cmc),
        ..base.clone()
    };
    // Fit once; every combiner reads the same shard results.
    let fits = run_sharded(&data, &plan, &config, 1)?;
    let mut by_method = Vec::with_capacity(cell.methods.len());
    for &method in &cell.methods {
        let combined = match method {
            CombineMethod::Cmc => cmc_combine(&fits)?,
            CombineMethod::Pie => pie_combine(&fits)?,
        };
        let est = estimates(&combined, estimator)?;
        by_method.push(replicate_metrics(&est, &truth, replicate)?);
    }
    Ok(ReplicateOutcome {
        n_shards: plan.n_shards(),
        by_method,
    })
}

fn report(replicates: &[ReplicateMetrics]) -> MetricReport {
    let column = |f: fn(&ReplicateMetrics) -> f64| replicates.iter().map(f).collect::<Vec<_>>();
    let (mse, cov, mae, width) = (
        column(|r| r.mse),
        column(|r| r.coverage),
        column(|r| r.mae),
        column(|r| r.mean_ci_width),
    );
    MetricReport {
        mse: stats::mean(&mse),
        coverage: stats::mean(&cov),
        mae: stats::mean(&mae),
        mean_ci_width: stats::mean(&width),
        n_replicates: replicates.len(),
        mse_se: stats::standard_error(&mse),
        coverage_se: stats::standard_error(&cov),
        mae_se: stats::standard_error(&mae),
        width_se: stats::standard_error(&width),
    }
}

/// Scores combined posteriors against their ground truths, one pair per
/// replicate. The averages equal the pooled metric formulas because every
/// replicate has the same dimensions.
pub fn evaluate(
    combined: &[CombinedPosterior],
    truths: &[SimTruth],
    estimator: PointEstimator,
) -> Result<MetricReport> {
    if combined.len() != truths.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} summaries but {} truths",
            combined.len(),
            truths.len()
        )));
    }
    if combined.is_empty() {
        return Err(Error::EmptyInput("no replicates to score".into()));
    }
    let replicates = combined
        .iter()
        .zip(truths)
        .enumerate()
        .map(|(d, (c, t))| replicate_metrics(&estimates(c, estimator)?, t, d as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(&replicates))
}

/// Simulate, shard, fit, combine and score every cell of `grid` over
/// `options.replicates` replicates.
///
/// Replicate `d` of every cell uses the same generating parameters, so
/// cells can be compared pairwise. Returns one row per (cell, method), in
/// grid order. Each row's metrics average the per-replicate metrics and
/// carry standard errors `sd / sqrt(D)`.
pub fn run_benchmark(
    grid: &[BenchmarkCell],
    base: &ModelConfig,
    sim: &SimConfig,
    options: &BenchmarkOptions,
) -> Result<Vec<BenchmarkRow>> {
    if options.replicates == 0 || options.parallelism == 0 {
        return Err(Error::InvalidParameter(
            "replicates and parallelism must be positive".into(),
        ));
    }
    base.validate()?;
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|c| (0..options.replicates as u64).map(move |d| (c, d)))
        .collect();
    let run = |&(c, d): &(usize, u64)| {
        let cell = &grid[c];
        run_replicate(cell, base, sim, d, options.estimator)
            .map_err(|e| e.context(format!("cell {c} (n={}, {:?}), replicate {d}", cell.n, cell.shards)))
    };
    let outcomes: Vec<Result<ReplicateOutcome>> = if options.parallelism == 1 {
        jobs.iter().map(run).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism)
            .build()
            .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    };
    let mut outcomes = outcomes.into_iter();

    let mut rows = Vec::new();
    for cell in grid {
        let mut per_method: Vec<Vec<ReplicateMetrics>> = vec![Vec::new(); cell.methods.len()];
        let mut n_shards = 0;
        for _ in 0..options.replicates {
            let outcome = outcomes.next().expect("one outcome per job")?;
            n_shards = outcome.n_shards;
            for (slot, m) in per_method.iter_mut().zip(outcome.by_method) {
                slot.push(m);
            }
        }
        for (method, replicates) in cell.methods.iter().zip(per_method) {
            rows.push(BenchmarkRow {
                n: cell.n,
                shards: cell.shards,
                n_shards,
                method: *method,
                report: report(&replicates),
                replicates,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_base() -> ModelConfig {
        ModelConfig {
            n_factors: 1,
            n_iter: 60,
            burn_in: 20,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn smoke_single_shard_pie() {
        let grid = [BenchmarkCell { n: 2000, shards: ShardSpec::Count(1), methods: vec![CombineMethod::Pie] }];
        let sim = SimConfig { m: 3, p: 1, true_factors: 1, coefficient_scale: 0.0, loading_scale: 0.0, ..Default::default() };
        let rows = run_benchmark(&grid, &small_base(), &sim, &BenchmarkOptions { replicates: 1, ..Default::default() }).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0].report;
        assert!((0.0..=1.0).contains(&r.coverage));
        assert!(r.mse.is_finite() && r.mae.is_finite());
        assert_eq!(rows[0].n_shards, 1);
    }

    #[test]
    fn combiners_share_fits_and_replay() {
        let both = vec![CombineMethod::Cmc, CombineMethod::Pie];
        let grid = [BenchmarkCell { n: 400, shards: ShardSpec::Size(200), methods: both }];
        let sim = SimConfig { m: 3, p: 2, true_factors: 1, ..Default::default() };
        let opts = BenchmarkOptions { replicates: 2, parallelism: 2, ..Default::default() };
        let rows = run_benchmark(&grid, &small_base(), &sim, &opts).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n_shards, 2);

        // Separate cells per combiner see the same fits: metrics agree exactly.
        let split = [
            BenchmarkCell { n: 400, shards: ShardSpec::Size(200), methods: vec![CombineMethod::Cmc] },
            BenchmarkCell { n: 400, shards: ShardSpec::Size(200), methods: vec![CombineMethod::Pie] },
        ];
        let again = run_benchmark(&split, &small_base(), &sim, &BenchmarkOptions { replicates: 2, ..Default::default() }).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn errors_name_the_cell() {
        let grid = [BenchmarkCell { n: 10, shards: ShardSpec::Count(20), methods: vec![CombineMethod::Pie] }];
        let err = run_benchmark(&grid, &small_base(), &SimConfig::default(), &BenchmarkOptions::default()).unwrap_err();
        assert!(err.to_string().contains("cell 0"));
        assert_eq!(err.kind(), "invalid-parameter");
    }
}
