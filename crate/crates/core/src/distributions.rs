//! Noise and design distributions: samplers, densities, CDFs.
//!
//! The noise menu is closed (Gaussian, Student t, Cauchy, Laplace plus a
//! zero-noise test hook) so that densities and CDFs stay exact. All noise
//! densities are even.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Cauchy, Continuous, ContinuousCDF, Laplace, Normal, StudentsT};

use crate::error::{Error, Result};

/// Symmetric noise distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Gaussian { sigma: f64 },
    StudentT { nu: f64 },
    Cauchy,
    Laplace { b: f64 },
    /// All-zero noise. Test hook for exact oracles; not a real distribution
    /// and not exposed through the CLI.
    Degenerate0,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(NoiseModel::Gaussian { sigma })
        } else {
            Err(Error::BadConfig(format!("gaussian sigma must be > 0, got {sigma}")))
        }
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        if nu > 0.0 && nu.is_finite() {
            Ok(NoiseModel::StudentT { nu })
        } else {
            Err(Error::BadConfig(format!("t degrees of freedom must be > 0, got {nu}")))
        }
    }

    pub fn laplace(b: f64) -> Result<Self> {
        if b > 0.0 && b.is_finite() {
            Ok(NoiseModel::Laplace { b })
        } else {
            Err(Error::BadConfig(format!("laplace scale must be > 0, got {b}")))
        }
    }

    /// Density phi(z).
    pub fn density(&self, z: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => Normal::new(0.0, sigma).unwrap().pdf(z),
            NoiseModel::StudentT { nu } => StudentsT::new(0.0, 1.0, nu).unwrap().pdf(z),
            NoiseModel::Cauchy => Cauchy::new(0.0, 1.0).unwrap().pdf(z),
            NoiseModel::Laplace { b } => Laplace::new(0.0, b).unwrap().pdf(z),
            NoiseModel::Degenerate0 => 0.0,
        }
    }

    /// CDF Phi(z).
    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => Normal::new(0.0, sigma).unwrap().cdf(z),
            NoiseModel::StudentT { nu } => StudentsT::new(0.0, 1.0, nu).unwrap().cdf(z),
            NoiseModel::Cauchy => Cauchy::new(0.0, 1.0).unwrap().cdf(z),
            NoiseModel::Laplace { b } => Laplace::new(0.0, b).unwrap().cdf(z),
            NoiseModel::Degenerate0 => {
                if z < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Var(Z) when it exists.
    pub fn variance(&self) -> Result<f64> {
        match *self {
            NoiseModel::Gaussian { sigma } => Ok(sigma * sigma),
            NoiseModel::StudentT { nu } if nu > 2.0 => Ok(nu / (nu - 2.0)),
            NoiseModel::StudentT { .. } => {
                Err(Error::InfiniteMoment("Student t with nu <= 2 has no variance"))
            }
            NoiseModel::Cauchy => Err(Error::InfiniteMoment("Cauchy noise has no variance")),
            NoiseModel::Laplace { b } => Ok(2.0 * b * b),
            NoiseModel::Degenerate0 => Ok(0.0),
        }
    }

    /// E|Z| when it exists.
    pub fn abs_moment(&self) -> Result<f64> {
        match *self {
            NoiseModel::Gaussian { sigma } => {
                Ok(sigma * (2.0 / std::f64::consts::PI).sqrt())
            }
            NoiseModel::StudentT { nu } if nu > 1.0 => {
                // 2 * sqrt(nu) * Gamma((nu+1)/2) / (sqrt(pi) (nu-1) Gamma(nu/2))
                let g = statrs::function::gamma::gamma;
                Ok(2.0 * nu.sqrt() * g((nu + 1.0) / 2.0)
                    / (std::f64::consts::PI.sqrt() * (nu - 1.0) * g(nu / 2.0)))
            }
            NoiseModel::StudentT { .. } => {
                Err(Error::InfiniteMoment("Student t with nu <= 1 has no first moment"))
            }
            NoiseModel::Cauchy => Err(Error::InfiniteMoment("Cauchy noise has no first moment")),
            NoiseModel::Laplace { b } => Ok(b),
            NoiseModel::Degenerate0 => Ok(0.0),
        }
    }

    /// Fisher information for location, `int phi'^2 / phi`.
    pub fn location_information(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => 1.0 / (sigma * sigma),
            NoiseModel::StudentT { nu } => (nu + 1.0) / (nu + 3.0),
            NoiseModel::Cauchy => 0.5,
            NoiseModel::Laplace { b } => 1.0 / (b * b),
            NoiseModel::Degenerate0 => f64::INFINITY,
        }
    }

    /// A scale for quadrature panel layout (roughly the noise's width).
    pub fn scale_hint(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => sigma,
            NoiseModel::StudentT { .. } | NoiseModel::Cauchy => 1.0,
            NoiseModel::Laplace { b } => b,
            NoiseModel::Degenerate0 => 1.0,
        }
    }

    /// One draw.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                sigma * z
            }
            NoiseModel::StudentT { nu } => {
                rand_distr::StudentT::new(nu).unwrap().sample(rng)
            }
            NoiseModel::Cauchy => rand_distr::Cauchy::new(0.0, 1.0).unwrap().sample(rng),
            NoiseModel::Laplace { b } => {
                // inverse CDF from a uniform draw
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            NoiseModel::Degenerate0 => 0.0,
        }
    }

    /// Config spelling: `gaussian:<sigma>`, `t:<nu>`, `cauchy`, `laplace:<b>`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>, d: f64| -> Result<f64> {
            match a {
                None => Ok(d),
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::BadConfig(format!("bad noise parameter: {s}"))),
            }
        };
        match name {
            "gaussian" | "normal" => NoiseModel::gaussian(num(arg, 1.0)?),
            "t" => NoiseModel::student_t(num(arg, 3.0)?),
            "cauchy" => Ok(NoiseModel::Cauchy),
            "laplace" => NoiseModel::laplace(num(arg, 1.0)?),
            _ => Err(Error::BadConfig(format!("unknown noise: {s}"))),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            NoiseModel::Gaussian { sigma } => format!("gaussian:{sigma}"),
            NoiseModel::StudentT { nu } => format!("t:{nu}"),
            NoiseModel::Cauchy => "cauchy".into(),
            NoiseModel::Laplace { b } => format!("laplace:{b}"),
            NoiseModel::Degenerate0 => "degenerate0".into(),
        }
    }
}

/// n iid noise draws, deterministic per generator state.
pub fn sample_noise<R: Rng + ?Sized>(noise: &NoiseModel, rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| noise.sample(rng)).collect()
}

/// Compactly supported design distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignModel {
    Uniform { a: f64, b: f64 },
}

/// How design points are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    Random,
    /// Deterministic quantile grid x_i = Lambda^{-1}(i / (n+1)).
    Fixed,
}

impl DesignModel {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if a < b && a.is_finite() && b.is_finite() {
            Ok(DesignModel::Uniform { a, b })
        } else {
            Err(Error::BadConfig(format!("uniform design needs a < b, got [{a}, {b}]")))
        }
    }

    pub fn unit() -> Self {
        DesignModel::Uniform { a: 0.0, b: 1.0 }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            DesignModel::Uniform { a, b } => (a, b),
        }
    }

    /// Density lambda(x).
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            DesignModel::Uniform { a, b } => {
                if x >= a && x <= b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
        }
    }

    /// CDF Lambda(x).
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DesignModel::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
        }
    }

    /// Quantile Lambda^{-1}(p).
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            DesignModel::Uniform { a, b } => a + p * (b - a),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DesignModel::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
        }
    }

    /// Config spelling: `uniform:<a>,<b>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "uniform" => Ok(DesignModel::unit()),
            Some(("uniform", args)) => {
                let (a, b) = args
                    .split_once(',')
                    .ok_or_else(|| Error::BadConfig(format!("bad design: {s}")))?;
                let a = a.parse().map_err(|_| Error::BadConfig(format!("bad design: {s}")))?;
                let b = b.parse().map_err(|_| Error::BadConfig(format!("bad design: {s}")))?;
                DesignModel::uniform(a, b)
            }
            _ => Err(Error::BadConfig(format!("unknown design: {s}"))),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            DesignModel::Uniform { a, b } => format!("uniform:{a},{b}"),
        }
    }
}

/// Design points: iid draws in random mode, the quantile grid in fixed mode.
pub fn design_points<R: Rng + ?Sized>(
    design: &DesignModel,
    mode: DesignMode,
    rng: &mut R,
    n: usize,
) -> Vec<f64> {
    match mode {
        DesignMode::Random => (0..n).map(|_| design.sample(rng)).collect(),
        DesignMode::Fixed => (1..=n)
            .map(|i| design.quantile(i as f64 / (n as f64 + 1.0)))
            .collect(),
    }
}
