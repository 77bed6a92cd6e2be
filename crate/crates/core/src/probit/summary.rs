use nalgebra::DMatrix;

use super::state::IdentifiedDraw;
use crate::error::{Error, Result};
use crate::stats;

/// Naming and ordering of the identified parameters: every `b[m,p]` in
/// response-major order, then the strict upper triangle `r[i,j]`, `i < j`,
/// row by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterLayout {
    pub response_names: Vec<String>,
    pub predictor_names: Vec<String>,
}

impl ParameterLayout {
    pub fn new(response_names: Vec<String>, predictor_names: Vec<String>) -> Self {
        ParameterLayout {
            response_names,
            predictor_names,
        }
    }

    pub fn n_responses(&self) -> usize {
        self.response_names.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn n_coefficients(&self) -> usize {
        self.n_responses() * self.n_predictors()
    }

    pub fn n_correlations(&self) -> usize {
        let m = self.n_responses();
        m * (m - 1) / 2
    }

    pub fn n_params(&self) -> usize {
        self.n_coefficients() + self.n_correlations()
    }

    pub fn coefficient_index(&self, m: usize, p: usize) -> usize {
        m * self.n_predictors() + p
    }

    /// Index of `r[i,j]` for `i < j`.
    pub fn correlation_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        let m = self.n_responses();
        self.n_coefficients() + i * (2 * m - i - 1) / 2 + (j - i - 1)
    }

    pub fn parameter_names(&self) -> Vec<String> {
        let (m, p) = (self.n_responses(), self.n_predictors());
        let mut names = Vec::with_capacity(self.n_params());
        for i in 0..m {
            for j in 0..p {
                names.push(format!("b[{i},{j}]"));
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                names.push(format!("r[{i},{j}]"));
            }
        }
        names
    }

    /// Writes a draw into `out` in parameter order.
    pub fn flatten_into(&self, draw: &IdentifiedDraw, out: &mut [f64]) {
        let (m, p) = (self.n_responses(), self.n_predictors());
        let mut idx = 0;
        for i in 0..m {
            for j in 0..p {
                out[idx] = draw.b_tilde[(i, j)];
                idx += 1;
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                out[idx] = draw.r[(i, j)];
                idx += 1;
            }
        }
    }

    /// Rebuilds `(B~, R)` from a vector in parameter order.
    pub fn unflatten(&self, values: &[f64]) -> IdentifiedDraw {
        let (m, p) = (self.n_responses(), self.n_predictors());
        let b_tilde = DMatrix::from_fn(m, p, |i, j| values[self.coefficient_index(i, j)]);
        let r = DMatrix::from_fn(m, m, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => values[self.correlation_index(i, j)],
            std::cmp::Ordering::Greater => values[self.correlation_index(j, i)],
        });
        IdentifiedDraw { r, b_tilde }
    }
}

/// Per-parameter quantiles over a common level grid, plus posterior means.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileTable {
    pub layout: ParameterLayout,
    pub grid: Vec<f64>,
    /// `values[param][level]`, non-decreasing along each row.
    pub values: Vec<Vec<f64>>,
    pub means: Vec<f64>,
}

impl QuantileTable {
    /// Builds the table from raw draws, `draws[param][t]`.
    pub fn from_draws(layout: ParameterLayout, grid: &[f64], draws: &[Vec<f64>]) -> Self {
        let values = draws.iter().map(|d| stats::quantiles(d, grid)).collect();
        let means = draws.iter().map(|d| stats::mean(d)).collect();
        QuantileTable {
            layout,
            grid: grid.to_vec(),
            values,
            means,
        }
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.layout.parameter_names()
    }

    pub fn n_params(&self) -> usize {
        self.values.len()
    }

    pub fn level_index(&self, level: f64) -> Result<usize> {
        self.grid
            .iter()
            .position(|q| (q - level).abs() < 1e-12)
            .ok_or_else(|| Error::Configuration(format!("quantile grid has no level {level}")))
    }

    /// The column of the table at one grid level.
    pub fn level_values(&self, level: f64) -> Result<Vec<f64>> {
        let j = self.level_index(level)?;
        Ok(self.values.iter().map(|row| row[j]).collect())
    }

    /// `B~` and `R` assembled from the quantiles at `level`.
    pub fn at_level(&self, level: f64) -> Result<IdentifiedDraw> {
        Ok(self.layout.unflatten(&self.level_values(level)?))
    }

    pub fn at_means(&self) -> IdentifiedDraw {
        self.layout.unflatten(&self.means)
    }

    pub fn is_monotone(&self) -> bool {
        self.values
            .iter()
            .all(|row| row.windows(2).all(|w| w[0] <= w[1]))
    }

    /// Checks that another table describes the same parameters on the same grid.
    pub fn check_compatible(&self, other: &QuantileTable) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Configuration(format!(
                "quantile grids differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.layout != other.layout || self.values.len() != other.values.len() {
            return Err(Error::Configuration("parameter layouts differ".into()));
        }
        Ok(())
    }
}

/// Output of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary {
    pub quantiles: QuantileTable,
    /// Thinned raw draws, `draws[param][t]`, when retained.
    pub draws: Option<Vec<Vec<f64>>>,
    pub n_kept: usize,
}

impl PosteriorSummary {
    pub fn layout(&self) -> &ParameterLayout {
        &self.quantiles.layout
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.quantiles.parameter_names()
    }
}

impl AsRef<PosteriorSummary> for PosteriorSummary {
    fn as_ref(&self) -> &PosteriorSummary {
        self
    }
}
