//! Kolmogorov-Smirnov statistics and the log-log rate regression.

use crate::error::{Error, Result};

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Exact sup distance between the empirical CDF of `sample` and `cdf`.
///
/// Both one-sided gaps are checked at every sorted sample point, so jumps of
/// the empirical CDF are handled exactly.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let xs = sorted_copy(sample);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi.max(lo));
    }
    Ok(d)
}

/// Sup distance between the empirical CDFs of two samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let xs = sorted_copy(a);
    let ys = sorted_copy(b);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Least squares slope of log(mean_abs_error) against log(n).
pub fn rate_slope(ns: &[usize], mean_abs_errors: &[f64]) -> Result<f64> {
    if ns.len() < 3 || ns.len() != mean_abs_errors.len() {
        return Err(Error::NonPositiveInput);
    }
    if ns.iter().any(|&n| n == 0) || mean_abs_errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::NonPositiveInput);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = mean_abs_errors.iter().map(|&e| e.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn one_point_sample_vs_uniform() {
        let d = ks_one_sample(&[0.5], |x| x.clamp(0.0, 1.0)).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn equioscillating_sample() {
        let n = 40;
        let sample: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_one_sample(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_relative_eq!(d, 1.0 / (2.0 * n as f64), epsilon = 1e-15);
    }

    #[test]
    fn one_sample_from_own_cdf_is_small() {
        let mut rng = derive_rng(42, 0);
        let sample: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let d = ks_one_sample(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 1.95 / (1000f64).sqrt(), "ks {d}");
    }

    #[test]
    fn two_sample_edges() {
        let a = vec![1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0], &[1.0]).unwrap(), 1.0);
        assert!(ks_two_sample(&[], &a).is_err());
    }

    #[test]
    fn two_sample_same_distribution() {
        let mut rng = derive_rng(43, 0);
        let a: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_two_sample(&a, &b).unwrap();
        assert!(d <= 1.95 * (2.0 / 10_000f64).sqrt(), "ks {d}");
    }

    #[test]
    fn slopes_of_exact_rates() {
        let ns = [100usize, 500, 1000, 5000, 10000];
        let inv_n: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        assert_relative_eq!(rate_slope(&ns, &inv_n).unwrap(), -1.0, epsilon = 1e-12);
        let inv_sqrt: Vec<f64> = ns.iter().map(|&n| 1.0 / (n as f64).sqrt()).collect();
        assert_relative_eq!(rate_slope(&ns, &inv_sqrt).unwrap(), -0.5, epsilon = 1e-12);
        assert!(rate_slope(&ns[..2], &inv_n[..2]).is_err());
        assert!(rate_slope(&ns, &[1.0, 2.0, 0.0, 1.0, 1.0]).is_err());
    }
}
