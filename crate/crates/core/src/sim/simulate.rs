use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{derive_seed, sample_standard_normal, RngStream};
use crate::probit::{identify_parameters, Dataset};

const PARAMETER_TAG: u64 = 0x5349_4d50_4152_414d;
const DATA_TAG: u64 = 0x5349_4d44_4154_4131;

/// Settings for one synthetic dataset drawn from the factor probit model.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    /// Number of predictor columns, including the intercept when present.
    pub p: usize,
    /// Number of factors `L` in the generating covariance.
    pub true_factors: usize,
    pub include_intercept: bool,
    pub seed: u64,
    pub replicate_id: u64,
    /// Standard deviation of the generating coefficients (1 in the reference design).
    pub coefficient_scale: f64,
    /// Standard deviation of the generating loadings (1 in the reference design).
    pub loading_scale: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 1000,
            m: 6,
            p: 3,
            true_factors: 2,
            include_intercept: true,
            seed: 0,
            replicate_id: 0,
            coefficient_scale: 1.0,
            loading_scale: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < 2 || self.p == 0 || self.true_factors == 0 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 1, m >= 2, p >= 1, true_factors >= 1; got n={}, m={}, p={}, L={}",
                self.n, self.m, self.p, self.true_factors
            )));
        }
        if !(self.coefficient_scale >= 0.0 && self.loading_scale >= 0.0) {
            return Err(Error::InvalidParameter("scales must be non-negative".into()));
        }
        Ok(())
    }

    pub fn response_names(&self) -> Vec<String> {
        (1..=self.m).map(|i| format!("y{i}")).collect()
    }

    pub fn predictor_names(&self) -> Vec<String> {
        if self.include_intercept {
            std::iter::once("intercept".to_string())
                .chain((1..self.p).map(|i| format!("x{i}")))
                .collect()
        } else {
            (1..=self.p).map(|i| format!("x{i}")).collect()
        }
    }
}

/// Ground truth behind a synthetic dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct SimTruth {
    /// Identified coefficients `D^{-1/2} B`.
    pub b_true: DMatrix<f64>,
    pub r_true: DMatrix<f64>,
    /// Coefficients `B` actually used to generate the latents.
    pub b_generator: DMatrix<f64>,
    /// Loadings `Theta` actually used to generate the latents.
    pub theta_generator: DMatrix<f64>,
}

/// Simulates `(Y, X)` from the factor probit model.
///
/// Parameters are drawn from a stream that depends only on
/// `(seed, replicate_id)`, so replicates with the same id share their truth
/// across sample sizes; rows are drawn in order from a second stream, so a
/// smaller `n` yields a prefix of a larger one.
pub fn simulate_dataset(config: &SimConfig) -> Result<(Dataset, SimTruth)> {
    config.validate()?;
    let (n, m, p, l) = (config.n, config.m, config.p, config.true_factors);
    let replicate_seed = derive_seed(config.seed, config.replicate_id);

    let mut params = RngStream::new(derive_seed(replicate_seed, PARAMETER_TAG), 0);
    let mut b = DMatrix::zeros(m, p);
    for i in 0..m {
        for j in 0..p {
            b[(i, j)] = config.coefficient_scale * sample_standard_normal(&mut params);
        }
    }
    let mut theta = DMatrix::zeros(m, l);
    for i in 0..m {
        for k in 0..l {
            theta[(i, k)] = config.loading_scale * sample_standard_normal(&mut params);
        }
    }

    let mut rows = RngStream::new(derive_seed(replicate_seed, DATA_TAG), 0);
    let mut x = DMatrix::zeros(n, p);
    let mut y = DMatrix::zeros(n, m);
    let first_random = usize::from(config.include_intercept);
    let mut psi = vec![0.0; l];
    let mut out = vec![0u8; m];
    for row in 0..n {
        if config.include_intercept {
            x[(row, 0)] = 1.0;
        }
        for j in first_random..p {
            x[(row, j)] = sample_standard_normal(&mut rows);
        }
        let x_row: Vec<f64> = x.row(row).iter().copied().collect();
        draw_responses(&b, &theta, &x_row, &mut rows, &mut psi, &mut out);
        for i in 0..m {
            y[(row, i)] = out[i];
        }
    }

    let identified = identify_parameters(&theta, &b);
    let data = Dataset::new(y, x, config.response_names(), config.predictor_names())?;
    Ok((
        data,
        SimTruth {
            b_true: identified.b_tilde,
            r_true: identified.r,
            b_generator: b,
            theta_generator: theta,
        },
    ))
}

/// The latent stage for one row: `psi ~ N(0, I)`, `z ~ N(B x + Theta psi, I)`,
/// `y = 1{z > 0}`. `psi` and `out` are scratch buffers of length L and M.
pub fn draw_responses(
    b: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    x_row: &[f64],
    rng: &mut RngStream,
    psi: &mut [f64],
    out: &mut [u8],
) {
    psi.iter_mut().for_each(|v| *v = sample_standard_normal(rng));
    for (i, y) in out.iter_mut().enumerate() {
        let mean: f64 = x_row.iter().enumerate().map(|(j, xj)| b[(i, j)] * xj).sum::<f64>()
            + psi.iter().enumerate().map(|(k, pk)| theta[(i, k)] * pk).sum::<f64>();
        let z = mean + sample_standard_normal(rng);
        *y = u8::from(z > 0.0);
    }
}
