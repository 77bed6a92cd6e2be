//! The latent-factor multivariate probit model and its full-data Gibbs sampler.

mod chain;
mod config;
mod data;
mod orthant;
mod state;
mod summary;
mod updates;

pub use chain::run_chain;
pub use config::{validate_grid, ModelConfig, DEFAULT_QUANTILE_GRID, REQUIRED_LEVELS};
pub use data::Dataset;
pub use orthant::{bivariate_normal_cdf, gauss_legendre, orthant_probability};
pub use state::{identify_parameters, ChainState, IdentifiedDraw};
pub use summary::{ParameterLayout, PosteriorSummary, QuantileTable};
pub use updates::{
    coefficient_conditional, factor_conditional, loading_conditional, log_joint,
    regression_conditional, update_coefficients, update_factors, update_latents,
    update_latents_and_factors, update_loadings, CoefficientKernel, GaussianMoments,
};

/// Identified parameters of a chain state; see [`identify_parameters`].
pub fn identify(state: &ChainState) -> IdentifiedDraw {
    state.identify()
}
