//! Seed-addressable sampling primitives shared by every sampler in the crate.

mod mvn;
mod normal;
mod rng;
mod truncated;

pub use mvn::{sample_mvn, sample_standard_normal, PrecisionCholesky};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use rng::{derive_seed, RngStream};
pub use truncated::{sample_truncated_normal, Side};
