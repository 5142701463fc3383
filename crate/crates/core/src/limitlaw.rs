//! Simulation of the non-smooth limit law: two-sided marked Poisson
//! processes, their minimizer intervals, and midpoint samples.
//!
//! The limit objective is a step process W with W(0) = 0 whose events carry
//! marks distributed as L(Z + delta) - L(Z). Its minimum is attained on a
//! flat between two event times; the window grows by doubling until that
//! flat sits strictly inside the inner half-window. Event streams are
//! consumed on the fly, so a window that has to grow very large (marks with
//! nearly zero mean) costs time but not memory.

use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::NoiseModel;
use crate::error::{Error, Result};
use crate::losses::Loss;
use crate::rng::derive_rng;
use crate::theory::LocationScaleAsymptotics;

const MAX_DOUBLINGS: u32 = 20;

/// One jump component of the limit process: event intensity and the jump
/// size feeding its mark distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub intensity: f64,
    pub jump: f64,
}

/// Specification of the superposed two-sided marked Poisson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedProcessSpec {
    components: Vec<Component>,
    noise: NoiseModel,
    loss: Loss,
}

impl MarkedProcessSpec {
    pub fn new(components: Vec<Component>, noise: NoiseModel, loss: Loss) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::NoDiscontinuity);
        }
        if components.iter().any(|c| !(c.intensity > 0.0) || c.jump == 0.0) {
            return Err(Error::BadConfig(
                "components need intensity > 0 and a nonzero jump".into(),
            ));
        }
        Ok(MarkedProcessSpec { components, noise, loss })
    }

    /// Components read off a template's discontinuities under a design
    /// density, at the given true shift.
    pub fn from_template(
        template: &crate::templates::Template,
        design: &crate::distributions::DesignModel,
        theta_star: f64,
        noise: NoiseModel,
        loss: Loss,
    ) -> Result<Self> {
        let comps: Vec<Component> = template
            .discontinuities()
            .iter()
            .map(|d| Component {
                intensity: design.density(d.location + theta_star),
                jump: d.jump,
            })
            .filter(|c| c.intensity > 0.0)
            .collect();
        MarkedProcessSpec::new(comps, noise, loss)
    }

    pub fn total_intensity(&self) -> f64 {
        self.components.iter().map(|c| c.intensity).sum()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// One mark draw for the given side of the axis.
    fn draw_mark<R: Rng + ?Sized>(&self, rng: &mut R, sign: f64) -> f64 {
        let total = self.total_intensity();
        let mut u = rng.random::<f64>() * total;
        let mut jump = self.components[self.components.len() - 1].jump;
        for c in &self.components {
            if u < c.intensity {
                jump = c.jump;
                break;
            }
            u -= c.intensity;
        }
        let z = self.noise.sample(rng);
        self.loss.value(z + sign * jump) - self.loss.value(z)
    }
}

/// The closed flat on which the simulated process attains its minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerInterval {
    pub lower: f64,
    pub upper: f64,
    pub midpoint: f64,
    pub min_value: f64,
    pub window_used: f64,
}

/// Streaming state of one side of the axis (times are magnitudes).
struct SideState {
    last_t: f64,
    cum: f64,
    first_t: f64,
    /// minimum over flats whose right edge has been seen
    min_val: f64,
    min_lo: f64,
    min_hi: f64,
    /// value and start of the still-open last flat
    open_val: f64,
    open_lo: f64,
    /// event already drawn but beyond the current window
    pending: Option<(f64, f64)>,
}

impl SideState {
    fn new() -> Self {
        SideState {
            last_t: 0.0,
            cum: 0.0,
            first_t: f64::INFINITY,
            min_val: f64::INFINITY,
            min_lo: f64::INFINITY,
            min_hi: f64::NEG_INFINITY,
            open_val: f64::NAN,
            open_lo: f64::NAN,
            pending: None,
        }
    }

    /// Extend this side's event stream to time `target`; events drawn past
    /// the target are buffered so the stream stays consistent across window
    /// doublings.
    fn extend<R: Rng + ?Sized>(
        &mut self,
        spec: &MarkedProcessSpec,
        rng: &mut R,
        target: f64,
        sign: f64,
    ) {
        let rate = spec.total_intensity();
        let exp = rand_distr::Exp::new(rate).expect("positive intensity");
        loop {
            let (t, mark) = match self.pending.take() {
                Some(p) => p,
                None => {
                    let gap: f64 = exp.sample(rng);
                    (self.last_t + gap, spec.draw_mark(rng, sign))
                }
            };
            if t > target {
                self.pending = Some((t, mark));
                return;
            }
            if self.first_t.is_infinite() {
                self.first_t = t;
            } else {
                // the flat that just closed ran from the previous event to t
                self.close_flat(t);
            }
            self.cum += mark;
            self.open_val = self.cum;
            self.open_lo = t;
            self.last_t = t;
        }
    }

    fn close_flat(&mut self, right_edge: f64) {
        if self.open_val < self.min_val {
            self.min_val = self.open_val;
            self.min_lo = self.open_lo;
            self.min_hi = right_edge;
        } else if self.open_val == self.min_val {
            self.min_hi = right_edge;
        }
    }

    /// Candidate minimizing flats of this side inside [0, window]:
    /// (value, lo, hi) in side-local (positive) coordinates.
    fn candidates(&self, window: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(2);
        if self.min_val.is_finite() {
            out.push((self.min_val, self.min_lo, self.min_hi.min(window)));
        }
        if self.first_t.is_finite() {
            // the still-open flat, truncated at the window edge
            out.push((self.open_val, self.open_lo, window));
        }
        out
    }

    fn center_edge(&self, window: f64) -> f64 {
        self.first_t.min(window)
    }
}

/// Simulate the minimizer interval of the two-sided marked process.
pub fn simulate_min_interval<R: Rng + ?Sized>(
    spec: &MarkedProcessSpec,
    rng: &mut R,
) -> Result<MinimizerInterval> {
    let rate = spec.total_intensity();
    let mut window = 10.0 / rate;
    let mut right = SideState::new();
    let mut left = SideState::new();
    for _ in 0..=MAX_DOUBLINGS {
        right.extend(spec, rng, window, 1.0);
        left.extend(spec, rng, window, -1.0);

        // global candidates: (value, lo, hi) on the real axis
        let mut cands: Vec<(f64, f64, f64)> = Vec::with_capacity(5);
        cands.push((0.0, -left.center_edge(window), right.center_edge(window)));
        for (v, lo, hi) in right.candidates(window) {
            cands.push((v, lo, hi));
        }
        for (v, lo, hi) in left.candidates(window) {
            cands.push((v, -hi, -lo));
        }
        let min_value = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let mut t_lo = f64::INFINITY;
        let mut t_hi = f64::NEG_INFINITY;
        for &(v, lo, hi) in &cands {
            if v == min_value {
                t_lo = t_lo.min(lo);
                t_hi = t_hi.max(hi);
            }
        }
        if t_lo > -window / 2.0 && t_hi < window / 2.0 {
            return Ok(MinimizerInterval {
                lower: t_lo,
                upper: t_hi,
                midpoint: 0.5 * (t_lo + t_hi),
                min_value,
                window_used: window,
            });
        }
        window *= 2.0;
    }
    Err(Error::WindowExplosion(MAX_DOUBLINGS))
}

/// Independent midpoint draws; repeat r uses a generator derived from a
/// root drawn once from `rng`, so results are reproducible and independent
/// of parallel scheduling.
pub fn midpoint_sample<R: Rng + ?Sized>(
    spec: &MarkedProcessSpec,
    repeats: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if repeats == 0 {
        return Err(Error::EmptySample);
    }
    let root = rng.random::<u64>();
    (0..repeats)
        .into_par_iter()
        .map(|r| {
            let mut local = derive_rng(root, r as u64);
            simulate_min_interval(spec, &mut local).map(|iv| iv.midpoint)
        })
        .collect()
}

/// Midpoint samples for the location (xi) and scale (nu) limit processes of
/// the amplitude-location-scale model, on independent streams.
pub fn location_scale_limit_samples<R: Rng + ?Sized>(
    ls: &LocationScaleAsymptotics,
    noise: &NoiseModel,
    loss: &Loss,
    repeats: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let to_spec = |comps: &[(f64, f64)]| -> Result<MarkedProcessSpec> {
        MarkedProcessSpec::new(
            comps
                .iter()
                .map(|&(intensity, jump)| Component { intensity, jump })
                .collect(),
            *noise,
            *loss,
        )
    };
    let xi_spec = to_spec(&ls.xi_components)?;
    let nu_spec = to_spec(&ls.nu_components)?;
    let xi = midpoint_sample(&xi_spec, repeats, rng)?;
    let nu = midpoint_sample(&nu_spec, repeats, rng)?;
    Ok((xi, nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DesignModel;
    use crate::experiments::ks_two_sample;
    use crate::templates::Template;

    fn gauss() -> NoiseModel {
        NoiseModel::gaussian(1.0).unwrap()
    }

    fn spec_c() -> MarkedProcessSpec {
        MarkedProcessSpec::from_template(
            &Template::builtin("C").unwrap(),
            &DesignModel::unit(),
            0.0,
            gauss(),
            Loss::squared(),
        )
        .unwrap()
    }

    #[test]
    fn constant_marks_give_central_flat() {
        // degenerate noise and squared loss: every mark is exactly +1
        let spec = MarkedProcessSpec::new(
            vec![Component { intensity: 1.0, jump: 1.0 }],
            NoiseModel::Degenerate0,
            Loss::squared(),
        )
        .unwrap();
        for s in 0..50 {
            let mut rng = derive_rng(100, s);
            let iv = simulate_min_interval(&spec, &mut rng).unwrap();
            assert_eq!(iv.min_value, 0.0);
            assert!(iv.lower < 0.0 && iv.upper > 0.0, "[{}, {}]", iv.lower, iv.upper);
            assert_eq!(iv.midpoint, 0.5 * (iv.lower + iv.upper));
        }
    }

    #[test]
    fn template_c_spec_reads_intensities() {
        let spec = spec_c();
        assert_eq!(spec.total_intensity(), 2.0);
        let jumps: Vec<f64> = spec.components().iter().map(|c| c.jump).collect();
        assert_eq!(jumps, vec![1.0, -1.0]);
    }

    #[test]
    fn squared_loss_mark_mean_is_jump_squared() {
        // E[(Z + d)^2 - Z^2] = d^2
        let spec = spec_c();
        let mut rng = derive_rng(7, 0);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| spec.draw_mark(&mut rng, 1.0)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mark mean {mean}");
    }

    #[test]
    fn min_value_nonpositive_and_interval_ordered() {
        let spec = spec_c();
        let mut rng = derive_rng(8, 0);
        for _ in 0..200 {
            let iv = simulate_min_interval(&spec, &mut rng).unwrap();
            assert!(iv.min_value <= 0.0);
            assert!(iv.lower <= iv.upper);
            assert!(iv.upper <= iv.window_used / 2.0);
        }
    }

    #[test]
    fn midpoints_symmetric_about_zero() {
        let spec = spec_c();
        let mids = midpoint_sample(&spec, 100_000, &mut derive_rng(9, 0)).unwrap();
        let mean = mids.iter().sum::<f64>() / mids.len() as f64;
        let sd = (mids.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
            / (mids.len() - 1) as f64)
            .sqrt();
        let se = sd / (mids.len() as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn repeats_one_reproduces_the_derived_stream() {
        let spec = spec_c();
        let mut rng = derive_rng(10, 0);
        let root = rand::Rng::random::<u64>(&mut rng);
        let mut direct_rng = derive_rng(root, 0);
        let direct = simulate_min_interval(&spec, &mut direct_rng).unwrap();
        let via_sample = midpoint_sample(&spec, 1, &mut derive_rng(10, 0)).unwrap();
        assert_eq!(via_sample[0], direct.midpoint);
    }

    #[test]
    fn more_discontinuities_tighten_the_minimum() {
        let d_spec = MarkedProcessSpec::from_template(
            &Template::builtin("D").unwrap(),
            &DesignModel::unit(),
            0.0,
            gauss(),
            Loss::squared(),
        )
        .unwrap();
        let reps = 100_000;
        let c_mids = midpoint_sample(&spec_c(), reps, &mut derive_rng(11, 0)).unwrap();
        let d_mids = midpoint_sample(&d_spec, reps, &mut derive_rng(11, 1)).unwrap();
        let iqr = |xs: &[f64]| {
            let mut v = xs.to_vec();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v[(0.75 * v.len() as f64) as usize] - v[(0.25 * v.len() as f64) as usize]
        };
        assert!(
            iqr(&d_mids) < iqr(&c_mids),
            "D iqr {} vs C iqr {}",
            iqr(&d_mids),
            iqr(&c_mids)
        );
    }

    #[test]
    fn doubling_intensities_halves_the_scale() {
        let spec1 = spec_c();
        let spec2 = MarkedProcessSpec::new(
            spec1
                .components()
                .iter()
                .map(|c| Component { intensity: 2.0 * c.intensity, jump: c.jump })
                .collect(),
            gauss(),
            Loss::squared(),
        )
        .unwrap();
        let reps = 100_000;
        let m1 = midpoint_sample(&spec1, reps, &mut derive_rng(12, 0)).unwrap();
        let m2: Vec<f64> = midpoint_sample(&spec2, reps, &mut derive_rng(12, 1))
            .unwrap()
            .into_iter()
            .map(|m| 2.0 * m)
            .collect();
        let d = ks_two_sample(&m1, &m2).unwrap();
        assert!(d <= 0.02, "rescaling KS {d}");
    }

    #[test]
    fn empty_component_list_rejected() {
        assert!(matches!(
            MarkedProcessSpec::new(vec![], gauss(), Loss::squared()),
            Err(Error::NoDiscontinuity)
        ));
    }

    #[test]
    fn location_scale_streams_are_independent() {
        let ls = crate::theory::location_scale_asymptotics(
            &Template::builtin("C").unwrap(),
            &DesignModel::unit(),
            &Loss::squared(),
            &gauss(),
        )
        .unwrap();
        let repeats = 20_000;
        let (xi, nu) =
            location_scale_limit_samples(&ls, &gauss(), &Loss::squared(), repeats, &mut derive_rng(13, 0))
                .unwrap();
        assert_eq!(xi.len(), repeats);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, mn) = (mean(&xi), mean(&nu));
        let mut corr = 0.0;
        let mut vx = 0.0;
        let mut vn = 0.0;
        for (a, b) in xi.iter().zip(&nu) {
            corr += (a - mx) * (b - mn);
            vx += (a - mx) * (a - mx);
            vn += (b - mn) * (b - mn);
        }
        let r = corr / (vx.sqrt() * vn.sqrt());
        assert!(r.abs() <= 3.0 / (repeats as f64).sqrt(), "corr {r}");
    }
}
