use nalgebra::DMatrix;
use rand::Rng;

use super::data::Dataset;
use crate::kernels::sample_standard_normal;

/// Unidentified parameters of one chain: latent utilities `z` (N x M),
/// factor scores `psi` (N x K), loadings `theta` (M x K) and coefficients
/// `b` (M x P).
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub z: DMatrix<f64>,
    pub psi: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

const INIT_LOADING_SD: f64 = 0.1;

impl ChainState {
    /// Starting point: `B = 0`, `Psi = 0`, loadings i.i.d. `N(0, 0.01)` and
    /// latents at the half-normal mean with the sign of the response.
    pub fn initialize<R: Rng + ?Sized>(data: &Dataset, n_factors: usize, rng: &mut R) -> Self {
        let (n, m, p) = (data.n_rows(), data.n_responses(), data.n_predictors());
        let half_normal_mean = (2.0 / std::f64::consts::PI).sqrt();
        let z = data
            .y()
            .map(|y| if y == 1 { half_normal_mean } else { -half_normal_mean });
        let mut theta = DMatrix::zeros(m, n_factors);
        // Row-major fill so the draw order does not depend on storage layout.
        for i in 0..m {
            for k in 0..n_factors {
                theta[(i, k)] = INIT_LOADING_SD * sample_standard_normal(rng);
            }
        }
        ChainState {
            z,
            psi: DMatrix::zeros(n, n_factors),
            theta,
            b: DMatrix::zeros(m, p),
        }
    }

    pub fn n_factors(&self) -> usize {
        self.theta.ncols()
    }

    pub fn is_finite(&self) -> bool {
        [&self.z, &self.psi, &self.theta, &self.b]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()))
    }

    /// `z_nm > 0` exactly when `y_nm = 1`.
    pub fn signs_match(&self, data: &Dataset) -> bool {
        self.z
            .iter()
            .zip(data.y().iter())
            .all(|(z, y)| (*z > 0.0) == (*y == 1))
    }

    pub fn identify(&self) -> IdentifiedDraw {
        identify_parameters(&self.theta, &self.b)
    }
}

/// Parameters on the identified (correlation) scale.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentifiedDraw {
    /// `R = D^{-1/2} (Theta Theta' + I) D^{-1/2}`.
    pub r: DMatrix<f64>,
    /// `B~ = D^{-1/2} B`.
    pub b_tilde: DMatrix<f64>,
}

/// Rescales `(Theta, B)` to the correlation scale with `D = diag(Theta Theta' + I)`.
/// The diagonal of `R` is set to exactly one.
pub fn identify_parameters(theta: &DMatrix<f64>, b: &DMatrix<f64>) -> IdentifiedDraw {
    let m = theta.nrows();
    let mut sigma = theta * theta.transpose();
    for i in 0..m {
        sigma[(i, i)] += 1.0;
    }
    let inv_sd: Vec<f64> = (0..m).map(|i| 1.0 / sigma[(i, i)].sqrt()).collect();
    let r = DMatrix::from_fn(m, m, |i, j| {
        // Evaluated on the upper triangle so R is exactly symmetric.
        let (a, c) = (i.min(j), i.max(j));
        if a == c {
            1.0
        } else {
            sigma[(a, c)] * inv_sd[a] * inv_sd[c]
        }
    });
    let b_tilde = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * inv_sd[i]);
    IdentifiedDraw { r, b_tilde }
}
