//! Shared fixtures for the criterion benchmarks.

use mvprobit::kernels::sample_standard_normal;
use mvprobit::probit::{ParameterLayout, QuantileTable};
use mvprobit::sim::{simulate_dataset, SimConfig};
use mvprobit::{Dataset, ModelConfig, PosteriorSummary, RngStream};

/// A simulated dataset with `k` true factors.
pub fn dataset(n: usize, m: usize, p: usize, k: usize) -> Dataset {
    let cfg = SimConfig { n, m, p, true_factors: k, seed: 1, ..Default::default() };
    simulate_dataset(&cfg).expect("valid simulation config").0
}

/// A short chain configuration fitting `k` factors.
pub fn short_chain(k: usize, n_iter: usize) -> ModelConfig {
    ModelConfig { n_factors: k, n_iter, burn_in: 0, keep_draws: true, ..Default::default() }
}

/// `s` shard summaries of Gaussian draws over an `m x p` layout.
pub fn gaussian_shards(s: usize, m: usize, p: usize, n_draws: usize) -> Vec<PosteriorSummary> {
    let layout = ParameterLayout::new(
        (0..m).map(|i| format!("y{i}")).collect(),
        (0..p).map(|i| format!("x{i}")).collect(),
    );
    let grid = mvprobit::probit::DEFAULT_QUANTILE_GRID.to_vec();
    (0..s)
        .map(|shard| {
            let mut rng = RngStream::new(9, shard as u64);
            let draws: Vec<Vec<f64>> = (0..layout.n_params())
                .map(|_| (0..n_draws).map(|_| sample_standard_normal(&mut rng)).collect())
                .collect();
            let quantiles = QuantileTable::from_draws(layout.clone(), &grid, &draws);
            PosteriorSummary { quantiles, draws: Some(draws), n_kept: n_draws }
        })
        .collect()
}
