use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[inline]
pub fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws from `N(mean, covariance)` through the lower Cholesky factor of the
/// covariance.
pub fn sample_mvn<R: Rng + ?Sized>(
    rng: &mut R,
    mean: &DVector<f64>,
    covariance: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "mean has length {} but covariance is {}x{}",
            mean.len(),
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    let chol = covariance
        .clone()
        .cholesky()
        .ok_or(Error::Factorization { update: "mvn" })?;
    let xi = DVector::from_fn(mean.len(), |_, _| sample_standard_normal(rng));
    Ok(mean + chol.l() * xi)
}

/// Cholesky factor `Q = L L'` of a precision matrix, factorized once and
/// reused for every Gaussian draw that shares it within an update.
///
/// A draw is `mean + L'^{-1} xi`, whose covariance is `(L L')^{-1} = Q^{-1}`.
#[derive(Clone, Debug)]
pub struct PrecisionCholesky {
    lower: DMatrix<f64>,
    /// `L'^{-1}`, upper triangular.
    inv_upper: DMatrix<f64>,
}

impl PrecisionCholesky {
    /// Factorizes `precision`; `update` names the caller for error reports.
    pub fn new(precision: DMatrix<f64>, update: &'static str) -> Result<Self> {
        if !precision.iter().all(|v| v.is_finite()) {
            return Err(Error::Factorization { update });
        }
        let dim = precision.nrows();
        let chol = precision.cholesky().ok_or(Error::Factorization { update })?;
        let lower = chol.unpack();
        let inv_upper = lower
            .tr_solve_lower_triangular(&DMatrix::identity(dim, dim))
            .ok_or(Error::Factorization { update })?;
        Ok(PrecisionCholesky { lower, inv_upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// `Q^{-1} rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let y = self
            .lower
            .solve_lower_triangular(rhs)
            .expect("factor has a non-zero diagonal");
        self.lower
            .tr_solve_lower_triangular(&y)
            .expect("factor has a non-zero diagonal")
    }

    /// `Q^{-1} rhs` for a matrix right-hand side.
    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let y = self
            .lower
            .solve_lower_triangular(rhs)
            .expect("factor has a non-zero diagonal");
        self.lower
            .tr_solve_lower_triangular(&y)
            .expect("factor has a non-zero diagonal")
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.inv_upper * self.inv_upper.transpose()
    }

    /// `L'^{-1}` (upper triangular), for callers that run their own inner loops.
    pub fn inv_upper(&self) -> &DMatrix<f64> {
        &self.inv_upper
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mean: &DVector<f64>) -> DVector<f64> {
        let xi = DVector::from_fn(self.dim(), |_, _| sample_standard_normal(rng));
        mean + &self.inv_upper * xi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::RngStream;
    use nalgebra::dmatrix;
    use nalgebra::dvector;

    fn empirical_moments(draws: &[DVector<f64>]) -> (DVector<f64>, DMatrix<f64>) {
        let n = draws.len() as f64;
        let dim = draws[0].len();
        let mean = draws.iter().fold(DVector::zeros(dim), |acc, d| acc + d) / n;
        let mut cov = DMatrix::zeros(dim, dim);
        for d in draws {
            let c = d - &mean;
            cov += &c * c.transpose();
        }
        (mean, cov / (n - 1.0))
    }

    #[test]
    fn standard_normal_moments() {
        let mut rng = RngStream::new(1, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_standard_normal(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn identity_covariance() {
        let mut rng = RngStream::new(2, 0);
        let mean = DVector::zeros(3);
        let cov = DMatrix::identity(3, 3);
        let draws: Vec<_> = (0..100_000)
            .map(|_| sample_mvn(&mut rng, &mean, &cov).unwrap())
            .collect();
        let (_, emp) = empirical_moments(&draws);
        assert!((emp - cov).abs().max() < 0.02);
    }

    #[test]
    fn correlated_moments() {
        let mut rng = RngStream::new(3, 0);
        let mean = dvector![1.0, 2.0];
        let cov = dmatrix![2.0, 1.0; 1.0, 2.0];
        let draws: Vec<_> = (0..100_000)
            .map(|_| sample_mvn(&mut rng, &mean, &cov).unwrap())
            .collect();
        let (m, c) = empirical_moments(&draws);
        // Mean SE is sqrt(2/1e5) ~ 0.0045; covariance entries SE ~ 0.009.
        assert!((m - mean).abs().max() < 0.02);
        assert!((c - cov).abs().max() < 0.05);
    }

    #[test]
    fn scalar_case() {
        let mut rng = RngStream::new(4, 0);
        let mean = dvector![3.0];
        let cov = dmatrix![4.0];
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_mvn(&mut rng, &mean, &cov).unwrap()[0])
            .collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m - 3.0).abs() < 0.02);
        assert!((v - 4.0).abs() < 0.1);
    }

    #[test]
    fn non_pd_reports_update() {
        let mut rng = RngStream::new(5, 0);
        let bad = dmatrix![1.0, 2.0; 2.0, 1.0];
        let err = sample_mvn(&mut rng, &DVector::zeros(2), &bad).unwrap_err();
        assert!(matches!(err, Error::Factorization { update: "mvn" }));
        let err = PrecisionCholesky::new(bad, "loadings").unwrap_err();
        assert!(matches!(err, Error::Factorization { update: "loadings" }));
    }

    #[test]
    fn precision_factor_inverts() {
        let q = dmatrix![4.0, 1.0, 0.5; 1.0, 3.0, 0.2; 0.5, 0.2, 2.0];
        let f = PrecisionCholesky::new(q.clone(), "test").unwrap();
        let cov = f.covariance();
        assert!((&q * &cov - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        let rhs = dvector![1.0, -2.0, 0.5];
        assert!((&q * f.solve(&rhs) - rhs).abs().max() < 1e-12);
    }
}
