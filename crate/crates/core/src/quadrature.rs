//! Gauss–Legendre quadrature against Gaussian densities. Used as an
//! independent reference for the limit solvers: it shares no code path with
//! the finite-difference or tree schemes.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integral of `f` over `[a, b]` with 64-point Gauss–Legendre.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(64);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// `E[phi(X)]` for `X ~ N(mean, variance)` by piecewise Gauss–Legendre.
///
/// `kinks` lists points where `phi` is not smooth; the integration range
/// `mean ± 10 sigma` is split there so each panel integrates a smooth
/// function and the result is accurate to near machine precision.
pub fn normal_expect(phi: impl Fn(f64) -> f64, mean: f64, variance: f64, kinks: &[f64]) -> Result<f64> {
    if variance.is_nan() || variance < 0.0 || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "normal_expect needs finite mean and nonnegative variance, got ({mean}, {variance})"
        )));
    }
    if variance == 0.0 {
        return Ok(phi(mean));
    }
    let sigma = variance.sqrt();
    let lo = mean - 10.0 * sigma;
    let hi = mean + 10.0 * sigma;
    let mut cuts = vec![lo, hi];
    cuts.extend(kinks.iter().copied().filter(|k| k.is_finite() && *k > lo && *k < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let density = |x: f64| {
        let z = (x - mean) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        // Sub-split wide smooth panels so 64 points stay plenty.
        let (a, b) = (pair[0], pair[1]);
        let pieces = ((b - a) / (2.0 * sigma)).ceil().max(1.0) as usize;
        for j in 0..pieces {
            let pa = a + (b - a) * j as f64 / pieces as f64;
            let pb = a + (b - a) * (j + 1) as f64 / pieces as f64;
            acc += integrate(|x| phi(x) * density(x), pa, pb);
        }
    }
    Ok(acc)
}

/// `P(a <= X <= b)` for `X ~ N(mean, variance)`.
pub fn normal_interval_probability(mean: f64, variance: f64, a: f64, b: f64) -> Result<f64> {
    normal_expect(
        |x| if x >= a && x <= b { 1.0 } else { 0.0 },
        mean,
        variance,
        &[a, b],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_moments_are_exact() {
        let v = normal_expect(|x| x * x, 0.0, 0.25, &[]).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-12);
        let v4 = normal_expect(|x| x.powi(4), 0.0, 1.0, &[]).unwrap();
        assert_abs_diff_eq!(v4, 3.0, epsilon = 1e-10);
        let shifted = normal_expect(|x| x, 1.5, 2.0, &[]).unwrap();
        assert_abs_diff_eq!(shifted, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn absolute_moment_matches_closed_form() {
        // E|Z| = sqrt(2/pi) for the standard normal.
        let v = normal_expect(|x| x.abs(), 0.0, 1.0, &[0.0]).unwrap();
        assert_abs_diff_eq!(v, (2.0 / std::f64::consts::PI).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn interval_probability_two_sigma() {
        let p = normal_interval_probability(0.0, 0.25, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(p, 0.9544997361036416, epsilon = 1e-10);
        let whole = normal_interval_probability(0.0, 1.0, -1e9, 1e9).unwrap();
        assert_abs_diff_eq!(whole, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_variance_evaluates_at_the_mean() {
        assert_eq!(normal_expect(|x| 1.0 - x.abs(), 0.5, 0.0, &[]).unwrap(), 0.5);
    }
}
