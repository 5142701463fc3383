//! The grid correlation estimator for periodic templates on a regular
//! design, equivalent to grid-restricted least squares.

use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::templates::Template;

const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicFit {
    /// Maximizing shift index in 1..=n (smallest on ties).
    pub t_hat: usize,
    /// t_hat / n, the shift on the unit torus.
    pub theta_hat: f64,
    /// The correlation value at t_hat.
    pub score: f64,
}

/// argmax over t in [n] of sum_i f((i - t)/n) y_i for a 1-periodic template
/// on the regular grid x_i = i/n.
pub fn fit_periodic_correlation(dataset: &Dataset, template: &Template) -> Result<PeriodicFit> {
    if dataset.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    if !template.is_periodic() {
        return Err(Error::BadConfig("correlation estimator needs a periodic template".into()));
    }
    let n = dataset.n();
    for (i, &x) in dataset.xs.iter().enumerate() {
        let expected = (i + 1) as f64 / n as f64;
        if (x - expected).abs() > GRID_SLACK {
            return Err(Error::NotRegularGrid);
        }
    }
    // f((i - t)/n) depends only on (i - t) mod n
    let weights: Vec<f64> = (0..n).map(|k| template.eval(k as f64 / n as f64)).collect();
    let nonzero: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(k, &w)| (k, w))
        .collect();

    let mut best_t = 1usize;
    let mut best_score = f64::NEG_INFINITY;
    for t in 1..=n {
        let mut score = 0.0;
        for &(k, w) in &nonzero {
            // observation index i with i = t + k (mod n), i in 1..=n
            let yi = dataset.ys[(t + k - 1) % n];
            score += w * yi;
        }
        if score > best_score {
            best_score = score;
            best_t = t;
        }
    }
    Ok(PeriodicFit {
        t_hat: best_t,
        theta_hat: best_t as f64 / n as f64,
        score: best_score,
    })
}

/// Grid-restricted least squares index, for the equivalence check:
/// argmin over t in [n] of sum_i (y_i - f((i - t)/n))^2.
pub fn periodic_least_squares_index(dataset: &Dataset, template: &Template) -> Result<usize> {
    if !template.is_periodic() {
        return Err(Error::BadConfig("needs a periodic template".into()));
    }
    let n = dataset.n();
    let mut best_t = 1usize;
    let mut best = f64::INFINITY;
    for t in 1..=n {
        let mut ss = 0.0;
        for i in 1..=n {
            let f = template.eval((i as f64 - t as f64) / n as f64);
            let r = dataset.ys[i - 1] - f;
            ss += r * r;
        }
        if ss < best {
            best = ss;
            best_t = t;
        }
    }
    Ok(best_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate_shift;
    use crate::distributions::{DesignMode, DesignModel, NoiseModel};
    use crate::rng::derive_rng;

    fn regular_grid_dataset(template: &Template, theta: f64, noise: &NoiseModel, n: usize, seed: u64) -> Dataset {
        let mut rng = derive_rng(seed, 0);
        let xs: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let zs = crate::distributions::sample_noise(noise, &mut rng, n);
        let ys = xs
            .iter()
            .zip(&zs)
            .map(|(&x, &z)| template.shift_eval(x, theta) + z)
            .collect();
        Dataset::from_columns(xs, ys).unwrap()
    }

    fn periodic_box() -> Template {
        Template::builtin("C").unwrap().into_periodic().unwrap()
    }

    #[test]
    fn recovers_on_grid_shift_without_noise() {
        let t = periodic_box();
        let ds = regular_grid_dataset(&t, 0.25, &NoiseModel::Degenerate0, 200, 0);
        let fit = fit_periodic_correlation(&ds, &t).unwrap();
        assert_eq!(fit.t_hat, 50);
        assert_eq!(fit.theta_hat, 0.25);
    }

    #[test]
    fn constant_signal_ties_return_t1() {
        let t = periodic_box();
        let n = 64;
        let xs: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let ys = vec![3.0; n];
        let ds = Dataset::from_columns(xs, ys).unwrap();
        let fit = fit_periodic_correlation(&ds, &t).unwrap();
        assert_eq!(fit.t_hat, 1);
    }

    #[test]
    fn equals_least_squares_index() {
        let t = periodic_box();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        for seed in 0..20 {
            let ds = regular_grid_dataset(&t, 0.3, &noise, 128, seed);
            let corr = fit_periodic_correlation(&ds, &t).unwrap();
            let ls = periodic_least_squares_index(&ds, &t).unwrap();
            assert_eq!(corr.t_hat, ls, "seed {seed}");
        }
    }

    #[test]
    fn irregular_grid_rejected() {
        let t = periodic_box();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let ds = generate_shift(&t, 0.0, &DesignModel::unit(), &noise, 50, DesignMode::Random, &mut derive_rng(1, 0)).unwrap();
        assert!(matches!(fit_periodic_correlation(&ds, &t), Err(Error::NotRegularGrid)));
    }
}
