use rand::Rng;
use rand_distr::{Exp1, Open01};

use super::normal::{std_normal_cdf, std_normal_quantile};

/// Which half-line a one-sided truncated normal lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Support `(0, inf)`.
    Positive,
    /// Support `(-inf, 0]`.
    Negative,
}

impl Side {
    pub fn from_response(y: u8) -> Side {
        if y == 1 {
            Side::Positive
        } else {
            Side::Negative
        }
    }
}

/// Standardized lower truncation points above this use exponential
/// rejection; below it the inverse CDF is exact to working precision.
const TAIL_SWITCH: f64 = 2.0;

/// Draws from `N(mean, 1)` restricted to one side of zero.
///
/// The returned value always strictly satisfies the side constraint
/// (`> 0` for [`Side::Positive`], `<= 0` for [`Side::Negative`]).
pub fn sample_truncated_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, side: Side) -> f64 {
    match side {
        Side::Positive => sample_above_zero(rng, mean),
        Side::Negative => -sample_above_zero(rng, -mean),
    }
}

/// `N(mean, 1)` conditioned on `> 0`.
fn sample_above_zero<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    // Standardized lower bound: W = Z - mean ~ N(0,1) with W > a.
    let a = -mean;
    loop {
        let z = if a < TAIL_SWITCH {
            // W = -Phi^{-1}(U * Phi(-a)) puts all the mass above a and keeps
            // the small-probability side of the CDF where precision is.
            let u: f64 = rng.sample(Open01);
            mean - std_normal_quantile(u * std_normal_cdf(-a))
        } else {
            // Z = W - a is the excess over the bound, so it is returned as is.
            exponential_tail_excess(rng, a)
        };
        if z > 0.0 && z.is_finite() {
            return z;
        }
    }
}

/// Excess `W - a` of a standard normal conditioned on `W > a`, using a
/// translated exponential proposal with the optimal rate for bound `a`.
fn exponential_tail_excess<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample::<f64, _>(Exp1) / rate;
        let d = a + e - rate;
        let u: f64 = rng.sample(Open01);
        if u.ln() <= -0.5 * d * d {
            return e;
        }
    }
}
