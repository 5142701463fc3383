//! Closed-form and quadrature-based asymptotic quantities: the noise-loss
//! constant, limiting variances, the shifted-template discrepancy, jump
//! constants, population risk, Fisher information, and the location-scale
//! limit parameters.
//!
//! Everything here is deterministic; these values act as oracles for the
//! Monte Carlo layers.

use serde::{Deserialize, Serialize};

use crate::distributions::{DesignModel, NoiseModel};
use crate::error::{Error, Result};
use crate::losses::Loss;
use crate::quad::{integrate, integrate_real_line};
use crate::templates::{Smoothness, Template};

const TOL_REL: f64 = 1e-9;
const TOL_ABS: f64 = 1e-12;
const CURVATURE_FLOOR: f64 = 1e-12;

/// Limiting quantities for the shift model with a Lipschitz template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    /// E[L'(Z)^2] / E[L''(Z)]^2 (or its absolute-loss closed form).
    pub c_phi_loss: f64,
    /// E[f'(X - theta*)^2].
    pub denom: f64,
    /// Limiting variance of sqrt(n) (theta_hat - theta*).
    pub tau2: f64,
    /// Half the expected loss curvature, (1/2) int L'' phi.
    pub c0: f64,
    /// int (L')^2 phi.
    pub c1: f64,
    /// Fisher information E[f'(X-theta*)^2] * int phi'^2/phi.
    pub info: f64,
}

/// Inputs for the location-scale limit processes of the three parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationScaleAsymptotics {
    /// Variance of the normal limit of sqrt(n)(beta_hat - beta*).
    pub beta_var: f64,
    /// (intensity, jump) per discontinuity for the xi limit process.
    pub xi_components: Vec<(f64, f64)>,
    /// (intensity, jump) per discontinuity for the nu limit process.
    pub nu_components: Vec<(f64, f64)>,
}

fn reject_degenerate(noise: &NoiseModel) -> Result<()> {
    if matches!(noise, NoiseModel::Degenerate0) {
        return Err(Error::InadmissiblePair("degenerate noise has no asymptotics"));
    }
    Ok(())
}

/// E[Z^2 ^ c^2]: the truncated second moment entering the Huber constant.
fn truncated_second_moment(c: f64, noise: &NoiseModel) -> Result<f64> {
    let core = integrate(
        |z| z * z * noise.density(z),
        -c,
        c,
        &noise_ladder(noise, c),
        TOL_REL,
        TOL_ABS,
    )?;
    let p_in = prob_within(c, noise);
    Ok(core + c * c * (1.0 - p_in))
}

fn prob_within(c: f64, noise: &NoiseModel) -> f64 {
    noise.cdf(c) - noise.cdf(-c)
}

/// Split hints at multiples of the noise scale, clipped to (-c, c).
fn noise_ladder(noise: &NoiseModel, c: f64) -> Vec<f64> {
    let s = noise.scale_hint();
    [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|k| k * s)
        .filter(|z| z.abs() < c)
        .collect()
}

/// E[L'(Z)^2].
pub fn expected_d1_sq(loss: &Loss, noise: &NoiseModel) -> Result<f64> {
    reject_degenerate(noise)?;
    match *loss {
        Loss::SquaredError => Ok(4.0 * noise.variance().map_err(|_| {
            Error::InadmissiblePair("squared loss needs a finite noise second moment")
        })?),
        Loss::AbsoluteValue => Ok(1.0),
        Loss::Huber { c } => truncated_second_moment(c, noise),
        Loss::Tukey { c } => integrate(
            |z| {
                let d = loss.d1(z);
                d * d * noise.density(z)
            },
            -c,
            c,
            &noise_ladder(noise, c),
            TOL_REL,
            TOL_ABS,
        ),
    }
}

/// E[L''(Z)], for losses that have one. Errors with `ZeroCurvature` when the
/// aggregate is not safely positive.
pub fn expected_d2(loss: &Loss, noise: &NoiseModel) -> Result<f64> {
    reject_degenerate(noise)?;
    let v = match *loss {
        Loss::SquaredError => 2.0,
        Loss::AbsoluteValue => {
            return Err(Error::UnsupportedLoss(
                "absolute loss: use phi(0)-based closed forms",
            ))
        }
        Loss::Huber { c } => prob_within(c, noise),
        Loss::Tukey { c } => integrate(
            |z| loss.d2(z).expect("tukey d2 total") * noise.density(z),
            -c,
            c,
            &noise_ladder(noise, c),
            TOL_REL,
            TOL_ABS,
        )?,
    };
    if v <= CURVATURE_FLOOR {
        return Err(Error::ZeroCurvature(v));
    }
    Ok(v)
}

/// The noise-loss constant C_{phi,L}: E[L'(Z)^2]/E[L''(Z)]^2, specialized to
/// the noise variance for squared loss and 1/(4 phi(0)^2) for absolute loss.
pub fn c_phi_loss(loss: &Loss, noise: &NoiseModel) -> Result<f64> {
    reject_degenerate(noise)?;
    match *loss {
        Loss::SquaredError => noise
            .variance()
            .map_err(|_| Error::InfiniteMoment("squared loss under noise without variance")),
        Loss::AbsoluteValue => {
            let p0 = noise.density(0.0);
            if p0 <= 0.0 {
                return Err(Error::InadmissiblePair("absolute loss needs phi(0) > 0"));
            }
            Ok(1.0 / (4.0 * p0 * p0))
        }
        Loss::Huber { c } => {
            let p = prob_within(c, noise);
            if p <= CURVATURE_FLOOR {
                return Err(Error::ZeroCurvature(p));
            }
            Ok(truncated_second_moment(c, noise)? / (p * p))
        }
        Loss::Tukey { .. } => {
            let num = expected_d1_sq(loss, noise)?;
            let den = expected_d2(loss, noise)?;
            Ok(num / (den * den))
        }
    }
}

/// (1/2) int L'' phi, the curvature constant of the risk expansion. For the
/// absolute loss this is phi(0).
pub fn curvature_c0(loss: &Loss, noise: &NoiseModel) -> Result<f64> {
    reject_degenerate(noise)?;
    match loss {
        Loss::AbsoluteValue => Ok(noise.density(0.0)),
        _ => Ok(0.5 * expected_d2(loss, noise)?),
    }
}

fn eval_shifted_deriv(template: &Template, u: f64) -> f64 {
    for p in template.pieces() {
        if u >= p.lo && u < p.hi {
            let d = p.derivative_coeffs();
            let mut acc = 0.0;
            for &c in d.iter().rev() {
                acc = acc * u + c;
            }
            return acc;
        }
    }
    0.0
}

/// E[f'(X - theta*)^2] under the design density.
pub fn expected_slope_sq(template: &Template, design: &DesignModel, theta_star: f64) -> Result<f64> {
    let (a, b) = design.support();
    let splits: Vec<f64> = template.edges().iter().map(|e| e + theta_star).collect();
    integrate(
        |x| {
            let d = eval_shifted_deriv(template, x - theta_star);
            d * d * design.density(x)
        },
        a,
        b,
        &splits,
        TOL_REL,
        TOL_ABS,
    )
}

/// E[f(X)^2] under the design density.
pub fn expected_template_sq(template: &Template, design: &DesignModel) -> Result<f64> {
    let (a, b) = design.support();
    integrate(
        |x| {
            let f = template.eval(x);
            f * f * design.density(x)
        },
        a,
        b,
        &template.edges(),
        TOL_REL,
        TOL_ABS,
    )
}

/// Limiting variance tau^2 and companions for a Lipschitz template.
pub fn asymptotic_variance_shift(
    template: &Template,
    design: &DesignModel,
    loss: &Loss,
    noise: &NoiseModel,
    theta_star: f64,
) -> Result<AsymptoticReport> {
    if !matches!(template.smoothness(), Smoothness::Lipschitz) {
        return Err(Error::NonSmoothTemplate);
    }
    let c = c_phi_loss(loss, noise)?;
    let denom = expected_slope_sq(template, design, theta_star)?;
    let c0 = curvature_c0(loss, noise)?;
    let c1 = expected_d1_sq(loss, noise)?;
    let info = denom * noise.location_information();
    Ok(AsymptoticReport {
        c_phi_loss: c,
        denom,
        tau2: c / denom,
        c0,
        c1,
        info,
    })
}

/// Delta(theta1, theta2) = int (f(x-theta1) - f(x-theta2))^2 lambda(x) dx.
pub fn delta(template: &Template, design: &DesignModel, theta1: f64, theta2: f64) -> Result<f64> {
    let (a, b) = design.support();
    let mut splits: Vec<f64> = Vec::new();
    for e in template.edges() {
        if template.is_periodic() {
            // shifted edges repeat modulo 1 across the design window
            let mut s1 = (e + theta1).rem_euclid(1.0);
            let mut s2 = (e + theta2).rem_euclid(1.0);
            while s1 < b {
                splits.push(s1);
                s1 += 1.0;
            }
            while s2 < b {
                splits.push(s2);
                s2 += 1.0;
            }
        } else {
            splits.push(e + theta1);
            splits.push(e + theta2);
        }
    }
    integrate(
        |x| {
            let d = template.shift_eval(x, theta1) - template.shift_eval(x, theta2);
            d * d * design.density(x)
        },
        a,
        b,
        &splits,
        TOL_REL,
        1e-12,
    )
}

/// Jump constant D = sum over discontinuities of jump^2 * lambda(d + theta*).
pub fn jump_constant(template: &Template, design: &DesignModel, theta_star: f64) -> Result<f64> {
    if template.discontinuities().is_empty() {
        return Err(Error::NoDiscontinuity);
    }
    Ok(template
        .discontinuities()
        .iter()
        .map(|d| d.jump * d.jump * design.density(d.location + theta_star))
        .sum())
}

/// E[L(Z)], the risk floor M(theta*). Needs the loss-specific noise moment.
pub fn expected_loss(loss: &Loss, noise: &NoiseModel) -> Result<f64> {
    reject_degenerate(noise)?;
    match *loss {
        Loss::SquaredError => noise
            .variance()
            .map_err(|_| Error::InadmissiblePair("E[Z^2] infinite for this noise")),
        Loss::AbsoluteValue => noise
            .abs_moment()
            .map_err(|_| Error::InadmissiblePair("E|Z| infinite for this noise")),
        Loss::Huber { c } => {
            let e_abs = noise
                .abs_moment()
                .map_err(|_| Error::InadmissiblePair("E|Z| infinite for this noise"))?;
            let core = integrate(
                |z| 0.5 * z * z * noise.density(z),
                -c,
                c,
                &noise_ladder(noise, c),
                TOL_REL,
                TOL_ABS,
            )?;
            let abs_core = integrate(
                |z| z.abs() * noise.density(z),
                -c,
                c,
                &noise_ladder(noise, c),
                TOL_REL,
                TOL_ABS,
            )?;
            let p_in = prob_within(c, noise);
            Ok(core + c * (e_abs - abs_core) - 0.5 * c * c * (1.0 - p_in))
        }
        Loss::Tukey { c } => {
            let core = integrate(
                |z| loss.value(z) * noise.density(z),
                -c,
                c,
                &noise_ladder(noise, c),
                TOL_REL,
                TOL_ABS,
            )?;
            Ok(core + (1.0 - prob_within(c, noise)))
        }
    }
}

/// E[L(Z + a) - L(Z)], the inner integrand of the risk gap. Bounded
/// integrand for Lipschitz losses, so valid even under Cauchy noise.
fn loss_shift_gap(loss: &Loss, noise: &NoiseModel, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    match loss {
        Loss::SquaredError => {
            // E[(Z+a)^2 - Z^2] = a^2 for symmetric noise with finite variance
            noise
                .variance()
                .map_err(|_| Error::InadmissiblePair("squared-loss risk needs E[Z^2]"))?;
            Ok(a * a)
        }
        _ => {
            let mut kinks: Vec<f64> = loss.kinks();
            kinks.extend(loss.kinks().iter().map(|k| k - a));
            integrate_real_line(
                |z| (loss.value(z + a) - loss.value(z)) * noise.density(z),
                noise.scale_hint(),
                &kinks,
                TOL_REL,
                1e-13,
            )
        }
    }
}

/// M(theta) - M(theta*): the population risk gap, computed directly from the
/// difference integrand for conditioning.
pub fn population_risk_gap(
    template: &Template,
    design: &DesignModel,
    loss: &Loss,
    noise: &NoiseModel,
    theta: f64,
    theta_star: f64,
) -> Result<f64> {
    reject_degenerate(noise)?;
    let (a, b) = design.support();
    let mut splits: Vec<f64> = Vec::new();
    for e in template.edges() {
        splits.push(e + theta);
        splits.push(e + theta_star);
    }
    // probe admissibility once up front
    loss_shift_gap(loss, noise, 1.0)?;
    integrate(
        |x| {
            let gap_a = template.shift_eval(x, theta_star) - template.shift_eval(x, theta);
            if gap_a == 0.0 {
                return 0.0;
            }
            loss_shift_gap(loss, noise, gap_a).unwrap_or(f64::NAN) * design.density(x)
        },
        a,
        b,
        &splits,
        1e-8,
        1e-11,
    )
}

/// M(theta) = E[L(Y - f(X - theta))] under the true shift theta*.
pub fn population_risk(
    template: &Template,
    design: &DesignModel,
    loss: &Loss,
    noise: &NoiseModel,
    theta: f64,
    theta_star: f64,
) -> Result<f64> {
    let floor = expected_loss(loss, noise)?;
    Ok(floor + population_risk_gap(template, design, loss, noise, theta, theta_star)?)
}

/// Asymptotic variance ratio against the least squares benchmark under
/// Gaussian noise.
pub fn relative_efficiency(loss: &Loss, noise: &NoiseModel) -> Result<f64> {
    let NoiseModel::Gaussian { sigma } = noise else {
        return Err(Error::InadmissiblePair(
            "relative efficiency is defined against the Gaussian MLE",
        ));
    };
    Ok(c_phi_loss(loss, noise)? / (sigma * sigma))
}

/// The Section 5.2 limit parameters at truth (1, 0, 1): the amplitude's
/// normal variance and the component intensities of the xi and nu processes.
pub fn location_scale_asymptotics(
    template: &Template,
    design: &DesignModel,
    loss: &Loss,
    noise: &NoiseModel,
) -> Result<LocationScaleAsymptotics> {
    let c = c_phi_loss(loss, noise)?;
    let ef2 = expected_template_sq(template, design)?;
    if ef2 <= 0.0 {
        return Err(Error::InadmissiblePair("template vanishes on the design support"));
    }
    if template.discontinuities().is_empty() {
        return Err(Error::NoDiscontinuity);
    }
    let xi = template
        .discontinuities()
        .iter()
        .map(|d| (design.density(d.location), d.jump))
        .filter(|(lam, _)| *lam > 0.0)
        .collect::<Vec<_>>();
    let nu = template
        .discontinuities()
        .iter()
        .map(|d| (design.density(d.location) * d.location.abs(), d.jump))
        .filter(|(lam, _)| *lam > 0.0)
        .collect::<Vec<_>>();
    Ok(LocationScaleAsymptotics {
        beta_var: c / ef2,
        xi_components: xi,
        nu_components: nu,
    })
}
