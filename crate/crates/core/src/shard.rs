//! Disjoint row partitions and prior-fractionated per-shard chains.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::kernels::{derive_seed, RngStream};
use crate::probit::{run_chain, Dataset, ModelConfig, PosteriorSummary};

/// Domain tag separating the row shuffle from every other use of a seed.
const SHUFFLE_TAG: u64 = 0x5348_5546_464c_4531;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShardMode {
    /// `s` is the number of shards.
    ByCount,
    /// `s` is the target shard size; `ceil(n / s)` shards are created.
    BySize,
}

/// A random balanced partition of `n` rows into disjoint shards.
#[derive(Clone, Debug, PartialEq)]
pub struct ShardPlan {
    /// Shard id of every row.
    pub assignments: Vec<usize>,
    pub shard_sizes: Vec<usize>,
    /// Data proportion of each shard, `shard_sizes[s] / n`.
    pub epsilons: Vec<f64>,
    /// Seed the row shuffle was drawn with.
    pub seed: u64,
}

/// Splits `n` rows into balanced, disjoint shards after a seeded shuffle.
///
/// Shard sizes differ by at most one. With [`ShardMode::BySize`] the number
/// of shards is `ceil(n / s)`.
pub fn make_shard_plan(n: usize, s: usize, mode: ShardMode, seed: u64) -> Result<ShardPlan> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidParameter("row and shard counts must be positive".into()));
    }
    if s > n {
        return Err(Error::InvalidParameter(format!(
            "{} {s} exceeds the {n} available rows",
            match mode {
                ShardMode::ByCount => "shard count",
                ShardMode::BySize => "shard size",
            }
        )));
    }
    let n_shards = match mode {
        ShardMode::ByCount => s,
        ShardMode::BySize => n.div_ceil(s),
    };
    let base = n / n_shards;
    let extra = n % n_shards;
    let shard_sizes: Vec<usize> = (0..n_shards).map(|i| base + usize::from(i < extra)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut RngStream::new(derive_seed(seed, SHUFFLE_TAG), 0));
    let mut assignments = vec![0; n];
    let mut pos = 0;
    for (shard, &size) in shard_sizes.iter().enumerate() {
        for &row in &order[pos..pos + size] {
            assignments[row] = shard;
        }
        pos += size;
    }
    let epsilons = shard_sizes.iter().map(|&k| k as f64 / n as f64).collect();
    Ok(ShardPlan {
        assignments,
        shard_sizes,
        epsilons,
        seed,
    })
}

impl ShardPlan {
    pub fn n_rows(&self) -> usize {
        self.assignments.len()
    }

    pub fn n_shards(&self) -> usize {
        self.shard_sizes.len()
    }

    /// Rows of shard `s` in ascending order.
    pub fn rows(&self, s: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == s)
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks disjointness, coverage and the epsilon bookkeeping.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_rows();
        if self.epsilons.len() != self.n_shards() {
            return Err(Error::Configuration("epsilon count differs from shard count".into()));
        }
        let mut counts = vec![0usize; self.n_shards()];
        for &a in &self.assignments {
            if a >= self.n_shards() {
                return Err(Error::Configuration(format!("row assigned to unknown shard {a}")));
            }
            counts[a] += 1;
        }
        if counts != self.shard_sizes {
            return Err(Error::Configuration("shard sizes do not match assignments".into()));
        }
        for (s, (&size, &eps)) in self.shard_sizes.iter().zip(&self.epsilons).enumerate() {
            if size == 0 {
                return Err(Error::Configuration(format!("shard {s} is empty")));
            }
            if eps != size as f64 / n as f64 {
                return Err(Error::Configuration(format!("shard {s} epsilon is not size / n")));
            }
        }
        let total: f64 = self.epsilons.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Configuration(format!("epsilons sum to {total}")));
        }
        Ok(())
    }
}

/// One shard's chain output.
#[derive(Clone, Debug)]
pub struct ShardResult {
    pub shard_id: usize,
    pub epsilon: f64,
    pub summary: PosteriorSummary,
    pub wall_time: Duration,
    pub n_kept: usize,
}

impl AsRef<PosteriorSummary> for ShardResult {
    fn as_ref(&self) -> &PosteriorSummary {
        &self.summary
    }
}

/// Runs the chain of shard `s` on its rows with `epsilon = eps_s` and
/// stream id `s`.
pub fn run_shard(data: &Dataset, plan: &ShardPlan, config: &ModelConfig, s: usize) -> Result<ShardResult> {
    let start = Instant::now();
    let rows = plan.rows(s);
    let subset = data.select_rows(&rows);
    let summary = run_chain(&subset, config, plan.epsilons[s], s as u64)?;
    Ok(ShardResult {
        shard_id: s,
        epsilon: plan.epsilons[s],
        n_kept: summary.n_kept,
        summary,
        wall_time: start.elapsed(),
    })
}

/// Fits every shard, running up to `parallelism` chains at once.
///
/// Results come back ordered by shard id and do not depend on the degree
/// of parallelism. All shards run to completion; if any failed the whole
/// run fails with every failure listed.
pub fn run_sharded(
    data: &Dataset,
    plan: &ShardPlan,
    config: &ModelConfig,
    parallelism: usize,
) -> Result<Vec<ShardResult>> {
    if parallelism == 0 {
        return Err(Error::InvalidParameter("parallelism must be at least 1".into()));
    }
    if plan.n_rows() != data.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "plan covers {} rows but the dataset has {}",
            plan.n_rows(),
            data.n_rows()
        )));
    }
    plan.validate()?;
    config.validate()?;

    let outcomes: Vec<Result<ShardResult>> = if parallelism == 1 {
        (0..plan.n_shards()).map(|s| run_shard(data, plan, config, s)).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..plan.n_shards())
                .into_par_iter()
                .map(|s| run_shard(data, plan, config, s))
                .collect()
        })
    };

    let mut results = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (s, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => failures.push((s, e)),
        }
    }
    if failures.is_empty() {
        Ok(results)
    } else {
        Err(Error::ShardsFailed { failures })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_by_count() {
        let plan = make_shard_plan(10, 3, ShardMode::ByCount, 1).unwrap();
        assert_eq!(plan.shard_sizes, vec![4, 3, 3]);
        assert_eq!(plan.epsilons, vec![0.4, 0.3, 0.3]);
        plan.validate().unwrap();
    }

    #[test]
    fn fixed_size_shard_counts() {
        assert_eq!(make_shard_plan(40_000, 2000, ShardMode::BySize, 0).unwrap().n_shards(), 20);
        assert_eq!(make_shard_plan(100_000, 5000, ShardMode::BySize, 0).unwrap().n_shards(), 20);
        assert_eq!(make_shard_plan(100_000, 2000, ShardMode::BySize, 0).unwrap().n_shards(), 50);
        assert_eq!(make_shard_plan(40_000, 5000, ShardMode::BySize, 0).unwrap().n_shards(), 8);
        let uneven = make_shard_plan(2500, 1000, ShardMode::BySize, 0).unwrap();
        assert_eq!(uneven.shard_sizes, vec![834, 833, 833]);
    }

    #[test]
    fn invalid_sizes() {
        assert!(make_shard_plan(5, 6, ShardMode::ByCount, 0).is_err());
        assert!(make_shard_plan(5, 0, ShardMode::ByCount, 0).is_err());
        assert!(make_shard_plan(5, 6, ShardMode::BySize, 0).is_err());
        assert!(make_shard_plan(0, 1, ShardMode::BySize, 0).is_err());
    }

    #[test]
    fn shuffle_is_seeded() {
        let a = make_shard_plan(100, 4, ShardMode::ByCount, 3).unwrap();
        let b = make_shard_plan(100, 4, ShardMode::ByCount, 3).unwrap();
        let c = make_shard_plan(100, 4, ShardMode::ByCount, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.assignments, c.assignments);
        // Not the identity blocking.
        assert_ne!(a.rows(0), (0..25).collect::<Vec<_>>());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn plans_partition_rows(n in 1usize..400, frac in 0.0f64..1.0, by_size: bool, seed: u64) {
            let s = 1 + ((n - 1) as f64 * frac) as usize;
            let mode = if by_size { ShardMode::BySize } else { ShardMode::ByCount };
            let plan = make_shard_plan(n, s, mode, seed).unwrap();
            plan.validate().unwrap();
            let mut seen = vec![false; n];
            for shard in 0..plan.n_shards() {
                for r in plan.rows(shard) {
                    prop_assert!(!seen[r]);
                    seen[r] = true;
                }
            }
            prop_assert!(seen.iter().all(|v| *v));
            let max = *plan.shard_sizes.iter().max().unwrap();
            let min = *plan.shard_sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
        }
    }
}
