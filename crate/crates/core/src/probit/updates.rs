//! Gibbs full-conditional updates for the factor probit model.
//!
//! Every update draws from a Gaussian (or one-sided truncated Gaussian)
//! conditional, so each update is a direct draw rather than a proposal.
//! The coefficient and loading rows carry a `N(0, v I)` prior raised to the
//! power `epsilon`: their prior precision contribution is `epsilon / v`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::data::Dataset;
use super::state::ChainState;
use crate::error::{Error, Result};
use crate::kernels::{sample_standard_normal, sample_truncated_normal, PrecisionCholesky, Side};

/// Mean and covariance of a Gaussian full conditional.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Conjugate regression conditional `N((D'D + c I)^{-1} D'r, (D'D + c I)^{-1})`.
pub fn regression_conditional(
    design: &DMatrix<f64>,
    response: &DVector<f64>,
    prior_precision: f64,
    update: &'static str,
) -> Result<GaussianMoments> {
    if design.nrows() != response.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows, response has length {}",
            design.nrows(),
            response.len()
        )));
    }
    let factor = PrecisionCholesky::new(gram_plus_ridge(design, prior_precision), update)?;
    Ok(GaussianMoments {
        mean: factor.solve(&(design.transpose() * response)),
        covariance: factor.covariance(),
    })
}

/// Conditional of one factor score `psi_n` given the residual `z_n - B x_n`.
pub fn factor_conditional(theta: &DMatrix<f64>, residual: &DVector<f64>) -> Result<GaussianMoments> {
    regression_conditional(theta, residual, 1.0, "factors")
}

/// Conditional of coefficient row `b_m` given the residual `z_m - Psi theta_m`.
pub fn coefficient_conditional(
    x: &DMatrix<f64>,
    residual: &DVector<f64>,
    prior_variance: f64,
    epsilon: f64,
) -> Result<GaussianMoments> {
    regression_conditional(x, residual, epsilon / prior_variance, "coefficients")
}

/// Conditional of loading row `theta_m` given the residual `z_m - X b_m`.
pub fn loading_conditional(
    psi: &DMatrix<f64>,
    residual: &DVector<f64>,
    prior_variance: f64,
    epsilon: f64,
) -> Result<GaussianMoments> {
    regression_conditional(psi, residual, epsilon / prior_variance, "loadings")
}

fn gram_plus_ridge(design: &DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    let mut g = design.tr_mul(design);
    for i in 0..g.nrows() {
        g[(i, i)] += ridge;
    }
    g
}

/// `Z - Psi Theta'` or `Z - X B'` style residual matrices.
fn residual(z: &DMatrix<f64>, design: &DMatrix<f64>, rows: &DMatrix<f64>) -> DMatrix<f64> {
    let mut r = z.clone();
    r.gemm(-1.0, design, &rows.transpose(), 1.0);
    r
}

/// `X B'`, the N x M matrix of linear predictors.
fn linear_predictor(data: &Dataset, b: &DMatrix<f64>) -> DMatrix<f64> {
    data.x() * b.transpose()
}

#[inline]
fn dot_row(a: &DMatrix<f64>, ai: usize, b: &DMatrix<f64>, bi: usize) -> f64 {
    (0..a.ncols()).map(|k| a[(ai, k)] * b[(bi, k)]).sum()
}

/// Draws every row of `rows` (M x d) from `N(mean_m, Q^{-1})` where the
/// means are the columns of `means` (d x M), in row order.
fn draw_rows<R: Rng + ?Sized>(
    rng: &mut R,
    factor: &PrecisionCholesky,
    means: &DMatrix<f64>,
    rows: &mut DMatrix<f64>,
) {
    let d = factor.dim();
    let upper = factor.inv_upper();
    let mut xi = vec![0.0; d];
    for m in 0..rows.nrows() {
        xi.iter_mut().for_each(|v| *v = sample_standard_normal(rng));
        for i in 0..d {
            let noise: f64 = (i..d).map(|j| upper[(i, j)] * xi[j]).sum();
            rows[(m, i)] = means[(i, m)] + noise;
        }
    }
}

/// Refreshes every `z_nm` from `TN(x_n'b_m + psi_n'theta_m, 1)` on the side
/// given by `y_nm`, holding the other blocks fixed.
pub fn update_latents<R: Rng + ?Sized>(state: &mut ChainState, data: &Dataset, rng: &mut R) {
    let xb = linear_predictor(data, &state.b);
    let y = data.y();
    for n in 0..data.n_rows() {
        for m in 0..data.n_responses() {
            let mean = xb[(n, m)] + dot_row(&state.psi, n, &state.theta, m);
            state.z[(n, m)] = sample_truncated_normal(rng, mean, Side::from_response(y[(n, m)]));
        }
    }
}

/// Refreshes every factor score `psi_n` from its Gaussian conditional.
/// `Theta'Theta + I` is factorized once for the whole sweep.
pub fn update_factors<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    rng: &mut R,
) -> Result<()> {
    let factor = PrecisionCholesky::new(gram_plus_ridge(&state.theta, 1.0), "factors")?;
    let resid = residual(&state.z, data.x(), &state.b);
    // Means for all rows at once: (Theta'Theta + I)^{-1} Theta' (z_n - B x_n).
    let means = factor.solve_matrix(&(state.theta.transpose() * resid.transpose()));
    draw_rows(rng, &factor, &means, &mut state.psi);
    Ok(())
}

/// One pass over the rows in the nesting order of the reference sampler:
/// for each row `n` and response `m`, refresh `z_nm` and then immediately
/// refresh `psi_n` given the updated `z_n`.
///
/// The residual projection `Theta'(z_n - B x_n)` is maintained
/// incrementally so each refresh of `psi_n` costs O(K^2).
pub fn update_latents_and_factors<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    rng: &mut R,
) -> Result<()> {
    let (n_rows, n_resp, k) = (data.n_rows(), data.n_responses(), state.n_factors());
    let factor = PrecisionCholesky::new(gram_plus_ridge(&state.theta, 1.0), "factors")?;
    // gain = (Theta'Theta + I)^{-1} Theta', K x M.
    let gain = factor.solve_matrix(&state.theta.transpose());
    let upper = factor.inv_upper().clone();
    let xb = linear_predictor(data, &state.b);
    let y = data.y();

    let mut proj = vec![0.0; k];
    let mut psi = vec![0.0; k];
    let mut xi = vec![0.0; k];
    for n in 0..n_rows {
        proj.iter_mut().for_each(|v| *v = 0.0);
        for m in 0..n_resp {
            let e = state.z[(n, m)] - xb[(n, m)];
            for (i, p) in proj.iter_mut().enumerate() {
                *p += gain[(i, m)] * e;
            }
        }
        for (i, v) in psi.iter_mut().enumerate() {
            *v = state.psi[(n, i)];
        }
        for m in 0..n_resp {
            let fitted: f64 = (0..k).map(|i| psi[i] * state.theta[(m, i)]).sum();
            let mean = xb[(n, m)] + fitted;
            let z_new = sample_truncated_normal(rng, mean, Side::from_response(y[(n, m)]));
            let delta = z_new - state.z[(n, m)];
            state.z[(n, m)] = z_new;
            for (i, p) in proj.iter_mut().enumerate() {
                *p += gain[(i, m)] * delta;
            }
            xi.iter_mut().for_each(|v| *v = sample_standard_normal(rng));
            for i in 0..k {
                let noise: f64 = (i..k).map(|j| upper[(i, j)] * xi[j]).sum();
                psi[i] = proj[i] + noise;
            }
        }
        for (i, v) in psi.iter().enumerate() {
            state.psi[(n, i)] = *v;
        }
    }
    Ok(())
}

/// Coefficient-row update with its precision `X'X + (epsilon / v) I`
/// factorized once; the design never changes during a chain.
#[derive(Clone, Debug)]
pub struct CoefficientKernel {
    factor: PrecisionCholesky,
}

impl CoefficientKernel {
    pub fn new(x: &DMatrix<f64>, prior_variance: f64, epsilon: f64) -> Result<Self> {
        let factor =
            PrecisionCholesky::new(gram_plus_ridge(x, epsilon / prior_variance), "coefficients")?;
        Ok(CoefficientKernel { factor })
    }

    pub fn precision_covariance(&self) -> DMatrix<f64> {
        self.factor.covariance()
    }

    pub fn apply<R: Rng + ?Sized>(&self, state: &mut ChainState, data: &Dataset, rng: &mut R) {
        let resid = residual(&state.z, &state.psi, &state.theta);
        let means = self.factor.solve_matrix(&data.x().tr_mul(&resid));
        draw_rows(rng, &self.factor, &means, &mut state.b);
    }
}

/// Refreshes every `b_m` from `N((X'X + c I)^{-1} X'(z_m - Psi theta_m), (X'X + c I)^{-1})`
/// with `c = epsilon / prior_variance`.
pub fn update_coefficients<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    prior_variance: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<()> {
    CoefficientKernel::new(data.x(), prior_variance, epsilon)?.apply(state, data, rng);
    Ok(())
}

/// Refreshes every `theta_m` from
/// `N((Psi'Psi + c I)^{-1} Psi'(z_m - X b_m), (Psi'Psi + c I)^{-1})`
/// with `c = epsilon / prior_variance` in both moments.
pub fn update_loadings<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    prior_variance: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<()> {
    let factor = PrecisionCholesky::new(
        gram_plus_ridge(&state.psi, epsilon / prior_variance),
        "loadings",
    )?;
    let resid = residual(&state.z, data.x(), &state.b);
    let means = factor.solve_matrix(&state.psi.tr_mul(&resid));
    draw_rows(rng, &factor, &means, &mut state.theta);
    Ok(())
}

/// Log joint density of `(Z, Psi, Theta, B)` and `Y`, with the priors on
/// `Theta` and `B` raised to `epsilon`. Additive constants are dropped, and
/// `-inf` is returned when a latent sign contradicts its response.
pub fn log_joint(state: &ChainState, data: &Dataset, prior_variance: f64, epsilon: f64) -> f64 {
    if !state.signs_match(data) {
        return f64::NEG_INFINITY;
    }
    let fitted = linear_predictor(data, &state.b) + &state.psi * state.theta.transpose();
    let latent: f64 = (&state.z - fitted).iter().map(|e| -0.5 * e * e).sum();
    let scores: f64 = state.psi.iter().map(|v| -0.5 * v * v).sum();
    let prior: f64 = state
        .theta
        .iter()
        .chain(state.b.iter())
        .map(|v| -0.5 * v * v / prior_variance)
        .sum();
    latent + scores + epsilon * prior
}
