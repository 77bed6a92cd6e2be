//! Synthetic data, evaluation metrics, benchmark grids and the
//! correlation-clustering and coefficient-screening analyses.

mod benchmark;
mod cluster;
mod metrics;
mod screen;
mod simulate;

pub use benchmark::{
    evaluate, run_benchmark, BenchmarkCell, BenchmarkOptions, BenchmarkRow, PointEstimator, ReplicateMetrics,
    ShardSpec,
};
pub use cluster::{correlation_distance_clustering, Dendrogram, Linkage, Merge};
pub use metrics::{
    compute_coverage, compute_mae, compute_mse, mean_interval_width, MetricReport,
};
pub use screen::{screen_table, significance_screen, ScreenRow};
pub use simulate::{draw_responses, simulate_dataset, SimConfig, SimTruth};
