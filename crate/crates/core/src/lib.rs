//! Divide-and-conquer MCMC for the latent-factor multivariate probit model.
//!
//! The crate is organized bottom-up:
//!
//! * [`kernels`]: reproducible random streams and the normal, truncated
//!   normal and multivariate normal samplers.
//! * [`probit`]: the model, its Gibbs updates and the single-chain sampler.
//! * [`shard`]: disjoint row partitions and prior-fractionated chains run in
//!   parallel, one per shard.
//! * [`combine`]: consensus averaging of paired draws and quantile averaging
//!   of shard posteriors.
//! * [`sim`]: synthetic data, evaluation metrics, benchmark grids and the
//!   clustering and screening analyses.
//! * [`io`]: the on-disk dataset, summary, plan, truth and manifest formats.

pub mod combine;
pub mod error;
pub mod io;
pub mod kernels;
pub mod probit;
pub mod shard;
pub mod sim;
pub mod stats;

pub use combine::{cmc_combine, extract_point_estimates, pie_combine, CombineMethod, CombinedPosterior};
pub use error::{Error, Result};
pub use kernels::RngStream;
pub use probit::{run_chain, Dataset, ModelConfig, PosteriorSummary};
pub use shard::{make_shard_plan, run_sharded, ShardMode, ShardPlan, ShardResult};
