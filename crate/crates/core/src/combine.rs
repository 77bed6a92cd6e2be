//! Combining shard posteriors: consensus averaging of paired draws (CMC)
//! and quantile averaging (PIE).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::probit::{PosteriorSummary, QuantileTable};
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CombineMethod {
    Cmc,
    Pie,
}

impl CombineMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CombineMethod::Cmc => "cmc",
            CombineMethod::Pie => "pie",
        }
    }
}

impl fmt::Display for CombineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CombineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cmc" => Ok(CombineMethod::Cmc),
            "pie" => Ok(CombineMethod::Pie),
            other => Err(Error::InvalidParameter(format!("unknown combine method {other:?}"))),
        }
    }
}

/// A combined approximation of the full-data posterior.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedPosterior {
    pub method: CombineMethod,
    pub quantiles: QuantileTable,
    /// Combined draws; only consensus averaging produces them.
    pub draws: Option<Vec<Vec<f64>>>,
    pub n_shards: usize,
    pub n_kept: usize,
    /// Whether the elementwise median correlation matrix is positive
    /// semi-definite. The matrix is reported as is, never projected.
    pub median_correlation_psd: bool,
}

impl CombinedPosterior {
    fn new(
        method: CombineMethod,
        quantiles: QuantileTable,
        draws: Option<Vec<Vec<f64>>>,
        n_shards: usize,
        n_kept: usize,
    ) -> Result<Self> {
        let median_correlation_psd = is_psd(&quantiles.at_level(0.5)?.r);
        Ok(CombinedPosterior {
            method,
            quantiles,
            draws,
            n_shards,
            n_kept,
            median_correlation_psd,
        })
    }
}

fn is_psd(r: &nalgebra::DMatrix<f64>) -> bool {
    r.clone().symmetric_eigenvalues().min() >= -1e-10
}

fn check_shards<S: AsRef<PosteriorSummary>>(shards: &[S]) -> Result<&PosteriorSummary> {
    let first = shards
        .first()
        .ok_or_else(|| Error::EmptyInput("no shard summaries to combine".into()))?
        .as_ref();
    for s in shards.iter().skip(1) {
        first.quantiles.check_compatible(&s.as_ref().quantiles)?;
    }
    Ok(first)
}

/// Independent consensus Monte Carlo.
///
/// Draw `t` of every shard is averaged with per-parameter weights
/// `1 / var_s`, the inverse sample variance of that parameter's draws in
/// shard `s`. Quantiles are recomputed from the combined draws.
pub fn cmc_combine<S: AsRef<PosteriorSummary>>(shards: &[S]) -> Result<CombinedPosterior> {
    let first = check_shards(shards)?;
    let mut shard_draws = Vec::with_capacity(shards.len());
    for (s, shard) in shards.iter().enumerate() {
        let summary = shard.as_ref();
        let draws = summary.draws.as_ref().ok_or_else(|| Error::RequiresDraws {
            method: "cmc",
            what: format!("shard {s}"),
        })?;
        if summary.n_kept != first.n_kept || draws.iter().any(|d| d.len() != first.n_kept) {
            return Err(Error::Configuration(format!(
                "shard {s} keeps a different number of draws than shard 0"
            )));
        }
        shard_draws.push(draws);
    }
    let names = first.parameter_names();
    let n_params = names.len();
    let n_kept = first.n_kept;

    let mut combined = Vec::with_capacity(n_params);
    for p in 0..n_params {
        let mut weights = Vec::with_capacity(shards.len());
        for (s, draws) in shard_draws.iter().enumerate() {
            let var = stats::sample_variance(&draws[p]);
            if var.is_nan() || var <= 0.0 {
                return Err(Error::DegenerateVariance {
                    parameter: names[p].clone(),
                    shard: s,
                });
            }
            weights.push(1.0 / var);
        }
        let total: f64 = weights.iter().sum();
        // Written as an offset from shard 0 so single-shard and identical
        // inputs come back bit for bit.
        let reference = &shard_draws[0][p];
        let row: Vec<f64> = (0..n_kept)
            .map(|t| {
                let base = reference[t];
                let shift: f64 = shard_draws
                    .iter()
                    .zip(&weights)
                    .skip(1)
                    .map(|(d, w)| w * (d[p][t] - base))
                    .sum();
                base + shift / total
            })
            .collect();
        combined.push(row);
    }
    let quantiles = QuantileTable::from_draws(
        first.quantiles.layout.clone(),
        &first.quantiles.grid,
        &combined,
    );
    CombinedPosterior::new(CombineMethod::Cmc, quantiles, Some(combined), shards.len(), n_kept)
}

/// Posterior interval estimation: every quantile (and the mean) is the
/// unweighted average of the shard-level values.
pub fn pie_combine<S: AsRef<PosteriorSummary>>(shards: &[S]) -> Result<CombinedPosterior> {
    let first = check_shards(shards)?;
    let count = shards.len() as f64;
    let average = |pick: &dyn Fn(&QuantileTable) -> f64| {
        let base = pick(&first.quantiles);
        let shift: f64 = shards.iter().skip(1).map(|s| pick(&s.as_ref().quantiles) - base).sum();
        base + shift / count
    };
    let table = &first.quantiles;
    let mut values = Vec::with_capacity(table.n_params());
    for p in 0..table.n_params() {
        let mut row: Vec<f64> = (0..table.grid.len())
            .map(|j| average(&|t: &QuantileTable| t.values[p][j]))
            .collect();
        // Averaging monotone rows is monotone; rounding can still swap an ulp.
        for j in 1..row.len() {
            if row[j] < row[j - 1] {
                row[j] = row[j - 1];
            }
        }
        values.push(row);
    }
    let means = (0..table.n_params())
        .map(|p| average(&|t: &QuantileTable| t.means[p]))
        .collect();
    let quantiles = QuantileTable {
        layout: table.layout.clone(),
        grid: table.grid.clone(),
        values,
        means,
    };
    let n_kept = shards.iter().map(|s| s.as_ref().n_kept).min().unwrap_or(0);
    CombinedPosterior::new(CombineMethod::Pie, quantiles, None, shards.len(), n_kept)
}

/// Median and 95% interval of one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate {
    pub parameter: String,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Reads `(median, q0.025, q0.975)` off the quantile table for every parameter.
pub fn extract_point_estimates(combined: &CombinedPosterior) -> Result<Vec<PointEstimate>> {
    point_estimates(&combined.quantiles)
}

pub fn point_estimates(table: &QuantileTable) -> Result<Vec<PointEstimate>> {
    let (lo, mid, hi) = (
        table.level_index(0.025)?,
        table.level_index(0.5)?,
        table.level_index(0.975)?,
    );
    Ok(table
        .parameter_names()
        .into_iter()
        .zip(&table.values)
        .map(|(parameter, row)| PointEstimate {
            parameter,
            median: row[mid],
            lower: row[lo],
            upper: row[hi],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{sample_standard_normal, std_normal_quantile, RngStream};
    use crate::probit::ParameterLayout;
    use proptest::prelude::*;

    const GRID: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

    /// A 2-response, 1-predictor layout: b[0,0], b[1,0], r[0,1].
    fn layout() -> ParameterLayout {
        ParameterLayout::new(vec!["a".into(), "b".into()], vec!["x".into()])
    }

    fn summary_from(draws: Vec<Vec<f64>>) -> PosteriorSummary {
        let n_kept = draws[0].len();
        PosteriorSummary {
            quantiles: QuantileTable::from_draws(layout(), &GRID, &draws),
            draws: Some(draws),
            n_kept,
        }
    }

    fn gaussian_shard(seed: u64, means: [f64; 3], sd: f64, n: usize) -> PosteriorSummary {
        let mut rng = RngStream::new(seed, 0);
        let draws = means
            .iter()
            .map(|m| (0..n).map(|_| m + sd * sample_standard_normal(&mut rng)).collect())
            .collect();
        summary_from(draws)
    }

    #[test]
    fn single_shard_identity() {
        let s = gaussian_shard(1, [0.1, -0.4, 0.3], 0.2, 500);
        let cmc = cmc_combine(std::slice::from_ref(&s)).unwrap();
        assert_eq!(cmc.draws.as_ref().unwrap(), s.draws.as_ref().unwrap());
        assert_eq!(cmc.quantiles.values, s.quantiles.values);
        let pie = pie_combine(std::slice::from_ref(&s)).unwrap();
        assert_eq!(pie.quantiles.values, s.quantiles.values);
        assert!(pie.draws.is_none());
        assert_eq!(pie.method, CombineMethod::Pie);
    }

    #[test]
    fn identical_shards_are_fixed_points() {
        let s = gaussian_shard(2, [0.0, 1.0, 0.2], 0.1, 300);
        let shards = vec![s.clone(), s.clone(), s.clone()];
        let cmc = cmc_combine(&shards).unwrap();
        assert_eq!(cmc.draws.unwrap(), s.draws.clone().unwrap());
        let pie = pie_combine(&shards).unwrap();
        assert_eq!(pie.quantiles.values, s.quantiles.values);
    }

    #[test]
    fn two_gaussian_shards() {
        let n = 100_000;
        let a = gaussian_shard(3, [0.0; 3], 1.0, n);
        let b = gaussian_shard(4, [2.0; 3], 1.0, n);
        let cmc = cmc_combine(&[a.clone(), b.clone()]).unwrap();
        let d = &cmc.draws.unwrap()[0];
        let m = stats::mean(d);
        let v = stats::sample_variance(d);
        // Product of N(0,1) and N(2,1) is N(1, 1/2).
        assert!((m - 1.0).abs() < 3.0 * (0.5 / n as f64).sqrt() + 0.002, "{m}");
        assert!((v - 0.5).abs() < 0.01, "{v}");

        let pie = pie_combine(&[a, b]).unwrap();
        for (j, q) in GRID.iter().enumerate() {
            let expected = 1.0 + std_normal_quantile(*q);
            assert!((pie.quantiles.values[0][j] - expected).abs() < 0.03);
        }
    }

    #[test]
    fn missing_draws_and_degenerate_variance() {
        let mut s = gaussian_shard(5, [0.0; 3], 1.0, 50);
        s.draws = None;
        let err = cmc_combine(&[s]).unwrap_err();
        assert_eq!(err.kind(), "method-requires-draws");

        let flat = summary_from(vec![vec![1.0; 10], [0.0, 1.0].repeat(5), vec![0.5; 10]]);
        match cmc_combine(&[flat]).unwrap_err() {
            Error::DegenerateVariance { parameter, shard } => {
                assert_eq!(parameter, "b[0,0]");
                assert_eq!(shard, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_mismatch_is_configuration_error() {
        let a = gaussian_shard(6, [0.0; 3], 1.0, 50);
        let mut b = a.clone();
        b.quantiles.grid = vec![0.025, 0.3, 0.5, 0.75, 0.975];
        assert_eq!(pie_combine(&[a.clone(), b.clone()]).unwrap_err().kind(), "configuration");
        assert_eq!(cmc_combine(&[a, b]).unwrap_err().kind(), "configuration");
    }

    #[test]
    fn point_estimates_read_the_grid() {
        let s = summary_from(vec![vec![3.0; 4], vec![1.0, 2.0, 3.0, 4.0], vec![0.1; 4]]);
        let pie = pie_combine(&[s]).unwrap();
        let est = extract_point_estimates(&pie).unwrap();
        assert_eq!(est[0].median, 3.0);
        assert_eq!(est[0].lower, 3.0);
        assert_eq!(est[0].upper, 3.0);
        assert!(est[1].lower <= est[1].median && est[1].median <= est[1].upper);

        let mut normal = pie.clone();
        normal.quantiles.values[2] = GRID.iter().map(|q| std_normal_quantile(*q)).collect();
        let est = extract_point_estimates(&normal).unwrap();
        assert!(est[2].median.abs() < 1e-12);
        assert!((est[2].lower + 1.96).abs() < 1e-3 && (est[2].upper - 1.96).abs() < 1e-3);

        let mut missing = pie;
        missing.quantiles.grid = vec![0.05, 0.25, 0.5, 0.75, 0.95];
        assert_eq!(extract_point_estimates(&missing).unwrap_err().kind(), "configuration");
    }

    #[test]
    fn psd_flag() {
        let s = summary_from(vec![vec![0.0, 1.0]; 3]);
        assert!(pie_combine(&[s]).unwrap().median_correlation_psd);
    }

    fn arb_table_shards() -> impl Strategy<Value = Vec<Vec<Vec<f64>>>> {
        // shards x params x levels with non-decreasing rows.
        prop::collection::vec(
            prop::collection::vec(
                (-3.0f64..3.0, prop::collection::vec(0.0f64..1.0, GRID.len() - 1)).prop_map(
                    |(start, steps)| {
                        let mut row = vec![start];
                        for s in steps {
                            row.push(row.last().unwrap() + s);
                        }
                        row
                    },
                ),
                3,
            ),
            1..6,
        )
    }

    fn quantile_only(values: Vec<Vec<f64>>) -> PosteriorSummary {
        PosteriorSummary {
            quantiles: QuantileTable {
                layout: layout(),
                grid: GRID.to_vec(),
                means: values.iter().map(|r| r[2]).collect(),
                values,
            },
            draws: None,
            n_kept: 10,
        }
    }

    proptest! {
        #[test]
        fn pie_shift_and_permutation(tables in arb_table_shards(), c in -5.0f64..5.0, rot in 0usize..5) {
            let shards: Vec<_> = tables.iter().cloned().map(quantile_only).collect();
            let shifted: Vec<_> = tables
                .iter()
                .map(|t| quantile_only(t.iter().map(|r| r.iter().map(|v| v + c).collect()).collect()))
                .collect();
            let base = pie_combine(&shards).unwrap();
            let moved = pie_combine(&shifted).unwrap();
            prop_assert!(base.quantiles.is_monotone());
            for (a, b) in base.quantiles.values.iter().flatten().zip(moved.quantiles.values.iter().flatten()) {
                prop_assert!((b - a - c).abs() < 1e-9);
            }
            let mut rotated = shards.clone();
            rotated.rotate_left(rot % shards.len());
            let permuted = pie_combine(&rotated).unwrap();
            for (a, b) in base.quantiles.values.iter().flatten().zip(permuted.quantiles.values.iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn cmc_permutation_invariant(seed in 0u64..1000, n_shards in 2usize..5) {
            let shards: Vec<_> = (0..n_shards)
                .map(|s| gaussian_shard(seed * 10 + s as u64, [s as f64, 0.5, -0.2], 0.3 + 0.1 * s as f64, 64))
                .collect();
            let a = cmc_combine(&shards).unwrap();
            let mut rev = shards.clone();
            rev.reverse();
            let b = cmc_combine(&rev).unwrap();
            let (da, db) = (a.draws.unwrap(), b.draws.unwrap());
            for (x, y) in da.iter().flatten().zip(db.iter().flatten()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
            prop_assert!(a.quantiles.is_monotone());
        }
    }
}
