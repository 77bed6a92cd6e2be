//! Orthant probabilities `P(Y = y)` of the multivariate probit model in up
//! to three dimensions, by deterministic quadrature.
//!
//! The bivariate normal CDF follows Genz's Gauss-Legendre treatment of the
//! Drezner-Wesolowsky formulas; the trivariate case integrates the
//! conditional bivariate CDF over the first coordinate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{std_normal_cdf, std_normal_pdf};

/// `P(Y = y)` for `Z ~ N(mu, R)` and `y_m = 1{z_m > 0}`.
pub fn orthant_probability(mu: &[f64], r: &DMatrix<f64>, y: &[u8]) -> Result<f64> {
    let m = mu.len();
    if m > 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    if m == 0 || y.len() != m || r.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "mu has length {m}, y has length {}, R is {}x{}",
            y.len(),
            r.nrows(),
            r.ncols()
        )));
    }
    for i in 0..m {
        if (r[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("R must have a unit diagonal".into()));
        }
        for j in 0..m {
            if (r[(i, j)] - r[(j, i)]).abs() > 1e-12 {
                return Err(Error::NotSymmetric("correlation matrix".into()));
            }
        }
    }
    if y.iter().any(|v| *v > 1) {
        return Err(Error::InvalidParameter("responses must be 0 or 1".into()));
    }
    // Flip each coordinate with y = 0 so the event becomes {V <= s * mu}
    // with V ~ N(0, S R S).
    let s: Vec<f64> = y.iter().map(|v| if *v == 1 { 1.0 } else { -1.0 }).collect();
    let h: Vec<f64> = mu.iter().zip(&s).map(|(u, si)| u * si).collect();
    let corr = |i: usize, j: usize| s[i] * s[j] * r[(i, j)];
    Ok(match m {
        1 => std_normal_cdf(h[0]),
        2 => bivariate_normal_cdf(h[0], h[1], corr(0, 1)),
        _ => trivariate_normal_cdf(
            [h[0], h[1], h[2]],
            [corr(0, 1), corr(0, 2), corr(1, 2)],
        )?,
    })
}

/// `P(X <= h, Y <= k)` for standard bivariate normal `(X, Y)` with correlation `r`.
pub fn bivariate_normal_cdf(h: f64, k: f64, r: f64) -> f64 {
    bivariate_upper(-h, -k, r)
}

/// Genz's `bvnu`: `P(X > dh, Y > dk)`.
fn bivariate_upper(dh: f64, dk: f64, r: f64) -> f64 {
    use std::f64::consts::PI;
    if dh == f64::INFINITY || dk == f64::INFINITY {
        return 0.0;
    }
    if dh == f64::NEG_INFINITY {
        return if dk == f64::NEG_INFINITY { 1.0 } else { std_normal_cdf(-dk) };
    }
    if dk == f64::NEG_INFINITY {
        return std_normal_cdf(-dh);
    }
    if r == 0.0 {
        return std_normal_cdf(-dh) * std_normal_cdf(-dk);
    }
    let npts = if r.abs() < 0.3 {
        6
    } else if r.abs() < 0.75 {
        12
    } else {
        20
    };
    let (nodes, weights) = gauss_legendre(npts);
    // Map the [-1, 1] rule onto [0, 2] halves as in the reference code.
    let two_pi = 2.0 * PI;
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let bvn;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        let mut sum = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let sn = (asr * (1.0 + x)).sin();
            sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        bvn = sum * asr / two_pi + std_normal_cdf(-h) * std_normal_cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        let mut acc = 0.0;
        if r.abs() < 1.0 {
            let as_ = (1.0 - r) * (1.0 + r);
            let mut a = as_.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 80.0;
            let asr = -(bs / as_ + hk) / 2.0;
            if asr > -100.0 {
                acc = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
            }
            if hk > -100.0 {
                let b = bs.sqrt();
                let sp = two_pi.sqrt() * std_normal_cdf(-b / a);
                acc -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a /= 2.0;
            let mut sum = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                let xs = (a * (1.0 + x)).powi(2);
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-(hk / 2.0) * xs / (1.0 + rs).powi(2)).exp() / rs;
                    sum += w * asr.exp() * (sp - ep);
                }
            }
            acc = (a * sum - acc) / two_pi;
        }
        bvn = if r > 0.0 {
            acc + std_normal_cdf(-h.max(k))
        } else if h >= k {
            -acc
        } else {
            let l = if h < 0.0 {
                std_normal_cdf(k) - std_normal_cdf(h)
            } else {
                std_normal_cdf(-h) - std_normal_cdf(-k)
            };
            l - acc
        };
    }
    bvn.clamp(0.0, 1.0)
}

/// Integration range for the conditioning coordinate; the standard normal
/// mass outside `[-10, 10]` is below 1e-22.
const TAIL: f64 = 10.0;

fn trivariate_normal_cdf(h: [f64; 3], r: [f64; 3]) -> Result<f64> {
    // r = [r01, r02, r12]. Condition on the coordinate least correlated
    // with the others to keep the conditional standard deviations away
    // from zero.
    let pair = |i: usize, j: usize| match (i.min(j), i.max(j)) {
        (0, 1) => r[0],
        (0, 2) => r[1],
        _ => r[2],
    };
    let order = (0..3)
        .min_by(|&a, &b| {
            let worst = |c: usize| (0..3).filter(|&o| o != c).map(|o| pair(c, o).abs()).fold(0.0, f64::max);
            worst(a).total_cmp(&worst(b))
        })
        .expect("three coordinates");
    let others: Vec<usize> = (0..3).filter(|&o| o != order).collect();
    let (a, b) = (others[0], others[1]);
    let (ra, rb, rab) = (pair(order, a), pair(order, b), pair(a, b));
    let sa = (1.0 - ra * ra).sqrt();
    let sb = (1.0 - rb * rb).sqrt();
    if sa < 1e-8 || sb < 1e-8 {
        return Err(Error::InvalidParameter(
            "degenerate trivariate correlation matrix".into(),
        ));
    }
    let rho = ((rab - ra * rb) / (sa * sb)).clamp(-1.0, 1.0);
    let upper = h[order].min(TAIL);
    if upper <= -TAIL {
        return Ok(0.0);
    }
    let integrand = |x: f64| {
        std_normal_pdf(x) * bivariate_normal_cdf((h[a] - ra * x) / sa, (h[b] - rb * x) / sb, rho)
    };
    // Panel width shrinks with the conditional scale so sharp transitions
    // near singular correlations stay resolved.
    let width = 0.25 * sa.min(sb).min(1.0);
    let lower = -TAIL;
    let panels = ((upper - lower) / width).ceil().max(1.0) as usize;
    let step = (upper - lower) / panels as f64;
    let (nodes, weights) = gauss_legendre(10);
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lower + (p as f64 + 0.5) * step;
        let half = 0.5 * step;
        let panel: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * integrand(mid + half * x))
            .sum();
        total += half * panel;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            deriv = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / deriv;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
