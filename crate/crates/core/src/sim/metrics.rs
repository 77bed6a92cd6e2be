use nalgebra::DMatrix;

use super::simulate::SimTruth;
use crate::error::{Error, Result};

/// Evaluation metrics for one benchmark cell.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricReport {
    /// Mean squared error of the identified coefficients.
    pub mse: f64,
    /// Fraction of coefficients inside their 95% interval.
    pub coverage: f64,
    /// Mean absolute error of the strict upper triangle of `R`.
    pub mae: f64,
    pub mean_ci_width: f64,
    pub n_replicates: usize,
    pub mse_se: f64,
    pub coverage_se: f64,
    pub mae_se: f64,
    pub width_se: f64,
}

fn check_aligned(what: &str, n_est: usize, n_truth: usize) -> Result<()> {
    if n_est != n_truth {
        return Err(Error::DimensionMismatch(format!(
            "{n_est} {what} estimates for {n_truth} replicates"
        )));
    }
    if n_est == 0 {
        return Err(Error::EmptyInput(format!("no {what} estimates")));
    }
    Ok(())
}

fn check_shape(what: &str, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{what} estimate is {:?} but truth is {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `1/(DMP) sum_d sum_m sum_p (b_dmp - bhat_dmp)^2`.
pub fn compute_mse(estimates: &[DMatrix<f64>], truths: &[SimTruth]) -> Result<f64> {
    check_aligned("coefficient", estimates.len(), truths.len())?;
    let mut total = 0.0;
    let mut count = 0usize;
    for (est, truth) in estimates.iter().zip(truths) {
        check_shape("coefficient", est, &truth.b_true)?;
        total += est.iter().zip(truth.b_true.iter()).map(|(e, t)| (t - e).powi(2)).sum::<f64>();
        count += est.len();
    }
    Ok(total / count as f64)
}

/// Fraction of `(d, m, p)` cells with `lower <= b <= upper`.
pub fn compute_coverage(
    intervals: &[(DMatrix<f64>, DMatrix<f64>)],
    truths: &[SimTruth],
) -> Result<f64> {
    check_aligned("interval", intervals.len(), truths.len())?;
    let mut covered = 0usize;
    let mut count = 0usize;
    for (d, ((lower, upper), truth)) in intervals.iter().zip(truths).enumerate() {
        check_shape("interval", lower, &truth.b_true)?;
        check_shape("interval", upper, &truth.b_true)?;
        for ((l, u), t) in lower.iter().zip(upper.iter()).zip(truth.b_true.iter()) {
            if l > u {
                return Err(Error::MalformedInterval(format!(
                    "replicate {d}: lower {l} exceeds upper {u}"
                )));
            }
            covered += usize::from(*l <= *t && *t <= *u);
            count += 1;
        }
    }
    Ok(covered as f64 / count as f64)
}

/// `1/(D [(M^2 + M)/2 - M]) sum_d sum_i sum_{j>i} |r_dij - rhat_dij|`.
pub fn compute_mae(estimates: &[DMatrix<f64>], truths: &[SimTruth]) -> Result<f64> {
    check_aligned("correlation", estimates.len(), truths.len())?;
    let mut total = 0.0;
    let mut terms = 0usize;
    for (est, truth) in estimates.iter().zip(truths) {
        check_shape("correlation", est, &truth.r_true)?;
        let m = est.nrows();
        if est.ncols() != m {
            return Err(Error::DimensionMismatch("correlation estimate is not square".into()));
        }
        for i in 0..m {
            for j in i + 1..m {
                total += (truth.r_true[(i, j)] - est[(i, j)]).abs();
            }
        }
        terms += (m * m + m) / 2 - m;
    }
    Ok(total / terms as f64)
}

/// Average `upper - lower` over every interval.
pub fn mean_interval_width(intervals: &[(DMatrix<f64>, DMatrix<f64>)]) -> f64 {
    let (sum, count) = intervals.iter().fold((0.0, 0usize), |(s, c), (l, u)| {
        (s + (u - l).sum(), c + l.len())
    });
    sum / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn truth(b: DMatrix<f64>, r: DMatrix<f64>) -> SimTruth {
        SimTruth {
            b_generator: b.clone(),
            theta_generator: DMatrix::zeros(r.nrows(), 1),
            b_true: b,
            r_true: r,
        }
    }

    #[test]
    fn mse_cases() {
        let t = truth(dmatrix![0.0], DMatrix::identity(2, 2));
        assert_eq!(compute_mse(&[dmatrix![0.5]], std::slice::from_ref(&t)).unwrap(), 0.25);
        assert_eq!(compute_mse(&[dmatrix![0.0]], std::slice::from_ref(&t)).unwrap(), 0.0);
        let doubled = compute_mse(&[dmatrix![0.5], dmatrix![0.5]], &[t.clone(), t.clone()]).unwrap();
        assert_eq!(doubled, 0.25);
        assert!(compute_mse(&[dmatrix![0.5, 1.0]], &[t]).is_err());
    }

    #[test]
    fn coverage_cases() {
        let t = truth(dmatrix![0.2, -1.0], DMatrix::identity(2, 2));
        let wide = (dmatrix![-1e300, -1e300], dmatrix![1e300, 1e300]);
        assert_eq!(compute_coverage(&[wide], std::slice::from_ref(&t)).unwrap(), 1.0);
        let at_truth = (t.b_true.clone(), t.b_true.clone());
        assert_eq!(compute_coverage(&[at_truth], std::slice::from_ref(&t)).unwrap(), 1.0);
        let half = (dmatrix![0.0, 0.0], dmatrix![1.0, 1.0]);
        assert_eq!(compute_coverage(&[half], std::slice::from_ref(&t)).unwrap(), 0.5);
        let bad = (dmatrix![1.0, 0.0], dmatrix![0.0, 1.0]);
        assert_eq!(compute_coverage(&[bad], &[t]).unwrap_err().kind(), "malformed-interval");
    }

    #[test]
    fn mae_cases() {
        let r = dmatrix![1.0, 0.3; 0.3, 1.0];
        let t = truth(dmatrix![0.0; 0.0], r.clone());
        assert_eq!(compute_mae(std::slice::from_ref(&r), std::slice::from_ref(&t)).unwrap(), 0.0);
        let off = dmatrix![1.0, 0.5; 0.5, 1.0];
        assert!((compute_mae(&[off], &[t]).unwrap() - 0.2).abs() < 1e-15);
        // M = 3 has three upper-triangular terms per replicate.
        let t3 = truth(DMatrix::zeros(3, 1), DMatrix::identity(3, 3));
        let e3 = dmatrix![1.0, 0.3, 0.0; 0.3, 1.0, 0.0; 0.0, 0.0, 1.0];
        assert!((compute_mae(&[e3], &[t3]).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn width() {
        let iv = (dmatrix![0.0, 1.0], dmatrix![1.0, 4.0]);
        assert_eq!(mean_interval_width(&[iv]), 2.0);
    }
}
