use crate::error::{Error, Result};

/// Grid levels every configuration must contain (interval bounds and median).
pub const REQUIRED_LEVELS: [f64; 3] = [0.025, 0.5, 0.975];

pub const DEFAULT_QUANTILE_GRID: [f64; 9] = [0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975];

/// Sampler settings for one chain. The residual covariance of the latent
/// utilities is fixed to the identity and has no knob here.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub n_factors: usize,
    /// Variance `v` of the `N(0, v I)` priors on coefficient and loading rows.
    pub prior_variance: f64,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub quantile_grid: Vec<f64>,
    /// Keep the thinned raw draws in the summary (needed by consensus averaging).
    pub keep_draws: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            n_factors: 2,
            prior_variance: 1e6,
            n_iter: 2000,
            burn_in: 1000,
            thin: 1,
            seed: 0,
            quantile_grid: DEFAULT_QUANTILE_GRID.to_vec(),
            keep_draws: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_factors == 0 {
            return Err(Error::InvalidParameter("n_factors must be positive".into()));
        }
        if !(self.prior_variance.is_finite() && self.prior_variance > 0.0) {
            return Err(Error::InvalidParameter("prior_variance must be positive".into()));
        }
        if self.n_iter == 0 {
            return Err(Error::InvalidParameter("n_iter must be positive".into()));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::InvalidParameter(format!(
                "burn_in ({}) must be smaller than n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be positive".into()));
        }
        validate_grid(&self.quantile_grid)
    }

    /// Number of draws kept after burn-in and thinning.
    pub fn n_kept(&self) -> usize {
        (self.n_iter - self.burn_in).div_ceil(self.thin)
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(Error::Configuration("quantile levels must lie in (0, 1)".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Configuration("quantile grid must be strictly increasing".into()));
    }
    for level in REQUIRED_LEVELS {
        if !grid.contains(&level) {
            return Err(Error::Configuration(format!("quantile grid must contain {level}")));
        }
    }
    Ok(())
}
