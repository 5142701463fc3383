//! Empirical risk minimization: the 1D shift M-estimator, the
//! amplitude-location-scale estimator, and the periodic grid correlation
//! estimator.

mod location_scale;
mod periodic;
mod scan;

pub use location_scale::{
    fit_location_scale, objective_location_scale, LocationScaleResult, LsSearchConfig,
};
pub use periodic::{fit_periodic_correlation, periodic_least_squares_index, PeriodicFit};
pub(crate) use scan::ShiftScan;

use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::distributions::DesignModel;
use crate::error::{Error, Result};
use crate::losses::Loss;
use crate::templates::Template;

/// Relative tolerance under which two evaluated objective values count as
/// tied (with an absolute floor so exact zero objectives tie as well).
const TIE_REL: f64 = 1e-12;
/// Number of best candidate brackets refined by golden section.
const REFINE_BRACKETS: usize = 5;

/// Search controls for the shift fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Closed search interval for theta.
    pub bounds: (f64, f64),
    /// Size of the uniform coarse grid overlaid on the bounds (>= 8).
    pub coarse_grid: usize,
    /// Absolute tolerance of the golden-section refinement.
    pub refine_tol: f64,
    /// Add candidate breakpoints {x_i - d} for discontinuous templates.
    pub use_breakpoints: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            bounds: (-0.25, 0.25),
            coarse_grid: 64,
            refine_tol: 1e-7,
            use_breakpoints: true,
        }
    }
}

impl SearchConfig {
    pub fn with_bounds(lo: f64, hi: f64) -> Self {
        SearchConfig { bounds: (lo, hi), ..Default::default() }
    }

    /// Bounds [-2A, 2A] with A covering both the template and design
    /// supports; outside them the model no longer depends on theta.
    pub fn default_for(template: &Template, design: &DesignModel) -> Self {
        let (ta, tb) = template.support();
        let (da, db) = design.support();
        let mut a = da.abs().max(db.abs());
        if tb.is_finite() {
            a = a.max(ta.abs()).max(tb.abs());
        }
        SearchConfig::with_bounds(-2.0 * a, 2.0 * a)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::DegenerateBounds(lo, hi));
        }
        if self.coarse_grid < 8 {
            return Err(Error::BadConfig("coarse grid must have >= 8 points".into()));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::BadConfig("refine_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Outcome of a shift fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub theta_hat: f64,
    pub objective_at_min: f64,
    pub evaluations: usize,
    /// When several evaluated shifts tie at the minimum (flat objective),
    /// the range they span; the returned theta_hat is its lower end.
    pub minimizer_interval_hint: Option<(f64, f64)>,
}

impl EstimationResult {
    /// The display statistic used by the numerical study: the midpoint of a
    /// flat minimum when one was detected, otherwise theta_hat itself.
    pub fn point_estimate(&self) -> f64 {
        match self.minimizer_interval_hint {
            Some((lo, hi)) => 0.5 * (lo + hi),
            None => self.theta_hat,
        }
    }
}

/// The empirical risk (1/n) sum L(y_i - f(x_i - theta)).
pub fn objective(dataset: &Dataset, template: &Template, loss: &Loss, theta: f64) -> Result<f64> {
    if dataset.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut acc = 0.0;
    for (&x, &y) in dataset.xs.iter().zip(&dataset.ys) {
        acc += loss.value(y - template.shift_eval(x, theta));
    }
    Ok(acc / dataset.n() as f64)
}

/// Golden-section minimization on [a, b], logging every evaluation.
fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    log: &mut Vec<(f64, f64)>,
) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    log.push((x1, f1));
    log.push((x2, f2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
            log.push((x1, f1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            log.push((x2, f2));
        }
    }
}

/// Candidate shifts: the coarse grid plus midpoints of consecutive
/// breakpoints {x_i - d}.
fn candidate_shifts(
    scan: &ShiftScan,
    template: &Template,
    cfg: &SearchConfig,
) -> Vec<f64> {
    let (lo, hi) = cfg.bounds;
    let g = cfg.coarse_grid;
    let mut cands: Vec<f64> = (0..g)
        .map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64)
        .collect();
    if cfg.use_breakpoints && !template.discontinuities().is_empty() {
        let mut bps: Vec<f64> = Vec::new();
        for d in template.discontinuities() {
            for &x in scan.xs_sorted() {
                if template.is_periodic() {
                    // period images of the breakpoint inside the bounds
                    let base = x - d.location;
                    let mut k = ((lo - base) / 1.0).floor();
                    loop {
                        let b = base + k;
                        if b > hi {
                            break;
                        }
                        if b >= lo {
                            bps.push(b);
                        }
                        k += 1.0;
                    }
                } else {
                    let b = x - d.location;
                    if b >= lo && b <= hi {
                        bps.push(b);
                    }
                }
            }
        }
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cands.extend(bps.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    }
    cands
}

/// Global minimization of the empirical shift risk over the configured
/// bounds: breakpoint-aware candidate scan, then golden-section refinement
/// of the best brackets. Ties within `1e-12` relative return the smallest
/// shift and report the tied range.
pub fn fit_shift(
    dataset: &Dataset,
    template: &Template,
    loss: &Loss,
    cfg: &SearchConfig,
) -> Result<EstimationResult> {
    if dataset.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;
    let scan = ShiftScan::new(&dataset.xs, &dataset.ys, template, *loss);

    let mut cands = candidate_shifts(&scan, template, cfg);
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();

    let mut log: Vec<(f64, f64)> = Vec::with_capacity(cands.len() + 64);
    for &theta in &cands {
        log.push((theta, scan.objective(theta)));
    }
    let cand_vals: Vec<f64> = log.iter().map(|e| e.1).collect();

    // exact interior minima of candidate brackets (squared loss, affine
    // pieces): within a breakpoint flat the objective is a known quadratic
    if *loss == Loss::SquaredError {
        for w in cands.windows(2) {
            if let Some(t) = scan.bracket_quadratic_argmin(w[0], w[1]) {
                log.push((t, scan.objective(t)));
            }
        }
    }

    // best K brackets among the sorted candidates
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&i, &j| cand_vals[i].partial_cmp(&cand_vals[j]).unwrap());
    let (lo, hi) = cfg.bounds;
    let bracket_of = |idx: usize| {
        let a = if idx == 0 { lo } else { cands[idx - 1] };
        let b = if idx + 1 == cands.len() { hi } else { cands[idx + 1] };
        (a, b)
    };
    let mut refined = vec![false; cands.len()];
    for &idx in order.iter().take(REFINE_BRACKETS) {
        let (a, b) = bracket_of(idx);
        refined[idx] = true;
        if b - a > cfg.refine_tol {
            golden_section(|t| scan.objective(t), a, b, cfg.refine_tol, &mut log);
        }
    }

    // For losses with a bounded derivative the smooth part of the objective
    // moves at most slope_bound per unit shift, so any bracket whose value
    // minus slope_bound * half-width still exceeds the incumbent cannot hide
    // a better minimum. Refine every bracket that survives this test.
    if let Some(l1max) = loss.d1_bound() {
        let slope_bound = l1max * template.lipschitz_bound();
        if slope_bound > 0.0 {
            let incumbent = log
                .iter()
                .map(|e| e.1)
                .fold(f64::INFINITY, f64::min);
            let mut viable: Vec<(f64, usize)> = (0..cands.len())
                .filter_map(|idx| {
                    let (a, b) = bracket_of(idx);
                    let certificate = cand_vals[idx] - slope_bound * (b - a) * 0.5;
                    (!refined[idx] && b - a > cfg.refine_tol && certificate <= incumbent)
                        .then_some((certificate, idx))
                })
                .collect();
            viable.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            for &(_, idx) in viable.iter().take(64) {
                let (a, b) = bracket_of(idx);
                golden_section(|t| scan.objective(t), a, b, cfg.refine_tol, &mut log);
            }
        }
    }

    let &(_, best_val) = log
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("nonempty log");
    let tie_tol = TIE_REL * best_val.abs().max(1.0);
    let mut tie_lo = f64::INFINITY;
    let mut tie_hi = f64::NEG_INFINITY;
    let mut tie_count = 0usize;
    for &(theta, v) in &log {
        if (v - best_val).abs() <= tie_tol {
            tie_lo = tie_lo.min(theta);
            tie_hi = tie_hi.max(theta);
            tie_count += 1;
        }
    }
    let theta_hat = tie_lo;
    let hint = if tie_count > 1 && tie_hi > tie_lo {
        Some((tie_lo, tie_hi))
    } else {
        None
    };
    let evaluations = log.len();
    Ok(EstimationResult {
        theta_hat,
        objective_at_min: objective(dataset, template, loss, theta_hat)?,
        evaluations,
        minimizer_interval_hint: hint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate_shift;
    use crate::distributions::{DesignMode, NoiseModel};
    use crate::rng::derive_rng;

    fn unit() -> DesignModel {
        DesignModel::unit()
    }

    #[test]
    fn objective_examples() {
        let c = Template::builtin("C").unwrap();
        let ds = Dataset::from_columns(vec![0.5], vec![2.0]).unwrap();
        assert_eq!(objective(&ds, &c, &Loss::squared(), 0.0).unwrap(), 1.0);

        // theta far outside the support interaction: f(x - 10) = 0 everywhere
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let data = generate_shift(&c, 0.0, &unit(), &noise, 100, DesignMode::Random, &mut derive_rng(1, 0)).unwrap();
        let far = objective(&data, &c, &Loss::squared(), 10.0).unwrap();
        let base: f64 = data.ys.iter().map(|y| y * y).sum::<f64>() / 100.0;
        assert!((far - base).abs() < 1e-12);

        let zero_noise = generate_shift(&c, 0.05, &unit(), &NoiseModel::Degenerate0, 50, DesignMode::Random, &mut derive_rng(2, 0)).unwrap();
        for loss in [Loss::squared(), Loss::absolute(), Loss::huber(1.345).unwrap(), Loss::tukey(4.685).unwrap()] {
            assert_eq!(objective(&zero_noise, &c, &loss, 0.05).unwrap(), 0.0);
        }
    }

    #[test]
    fn recovers_shift_without_noise_smooth() {
        let a = Template::builtin("A").unwrap();
        let ds = generate_shift(&a, 0.1, &unit(), &NoiseModel::Degenerate0, 400, DesignMode::Random, &mut derive_rng(3, 0)).unwrap();
        let cfg = SearchConfig::with_bounds(-0.5, 0.5);
        let fit = fit_shift(&ds, &a, &Loss::squared(), &cfg).unwrap();
        assert!((fit.theta_hat - 0.1).abs() <= cfg.refine_tol * 10.0, "theta {}", fit.theta_hat);
        assert!(fit.objective_at_min <= 1e-12);
    }

    #[test]
    fn flat_minimum_hint_contains_truth() {
        let c = Template::builtin("C").unwrap();
        let ds = generate_shift(&c, 0.02, &unit(), &NoiseModel::Degenerate0, 10, DesignMode::Random, &mut derive_rng(4, 0)).unwrap();
        let fit = fit_shift(&ds, &c, &Loss::squared(), &SearchConfig::default()).unwrap();
        let (lo, hi) = fit.minimizer_interval_hint.expect("flat objective near truth");
        assert!(lo <= 0.02 && 0.02 <= hi, "hint [{lo}, {hi}]");
        assert_eq!(fit.theta_hat, lo);
        assert_eq!(fit.objective_at_min, 0.0);
    }

    #[test]
    fn empty_and_degenerate_inputs() {
        let c = Template::builtin("C").unwrap();
        let ds = Dataset::from_columns(vec![0.5], vec![1.0]).unwrap();
        let mut cfg = SearchConfig::default();
        cfg.bounds = (0.3, 0.3);
        assert!(matches!(
            fit_shift(&ds, &c, &Loss::squared(), &cfg),
            Err(Error::DegenerateBounds(_, _))
        ));
        assert!(Dataset::from_columns(vec![], vec![]).is_err());
    }

    #[test]
    fn default_bounds_cover_supports() {
        let a = Template::builtin("A").unwrap();
        let cfg = SearchConfig::default_for(&a, &unit());
        assert_eq!(cfg.bounds, (-2.0, 2.0));
    }

    #[test]
    fn shift_equivariance() {
        // shifting the design by s shifts theta_hat by s (up to fp rounding
        // of the transformed inputs, far below refine_tol)
        let e = Template::builtin("E").unwrap();
        let noise = NoiseModel::student_t(3.0).unwrap();
        let ds = generate_shift(&e, 0.0, &unit(), &noise, 300, DesignMode::Random, &mut derive_rng(6, 0)).unwrap();
        let s = 0.5;
        let shifted = Dataset::from_columns(
            ds.xs.iter().map(|x| x + s).collect(),
            ds.ys.clone(),
        )
        .unwrap();
        let cfg = SearchConfig::with_bounds(-0.25, 0.25);
        let cfg_s = SearchConfig::with_bounds(-0.25 + s, 0.25 + s);
        let fit = fit_shift(&ds, &e, &Loss::absolute(), &cfg).unwrap();
        let fit_s = fit_shift(&shifted, &e, &Loss::absolute(), &cfg_s).unwrap();
        assert!(
            (fit_s.theta_hat - (fit.theta_hat + s)).abs() < 1e-9,
            "{} vs {}",
            fit_s.theta_hat,
            fit.theta_hat + s
        );
    }

    #[test]
    fn matches_brute_force_on_small_instance() {
        let d = Template::builtin("D").unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let ds = generate_shift(&d, -0.07, &unit(), &noise, 150, DesignMode::Random, &mut derive_rng(7, 0)).unwrap();
        let cfg = SearchConfig::default();
        let fit = fit_shift(&ds, &d, &Loss::huber(1.345).unwrap(), &cfg).unwrap();
        // dumb scan over a fine grid plus all breakpoints
        let loss = Loss::huber(1.345).unwrap();
        let mut best = f64::INFINITY;
        let mut best_t = 0.0;
        let g = 200_000;
        for i in 0..=g {
            let t = -0.25 + 0.5 * i as f64 / g as f64;
            let v = objective(&ds, &d, &loss, t).unwrap();
            if v < best {
                best = v;
                best_t = t;
            }
        }
        assert!(
            fit.objective_at_min <= best + 1e-12,
            "fit {} vs brute {} (fit theta {}, brute theta {best_t})",
            fit.objective_at_min,
            best,
            fit.theta_hat
        );
    }
}
