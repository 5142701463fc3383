//! The four residual losses and their derivatives.
//!
//! All four are even, vanish at zero and are non-decreasing away from the
//! origin. Huber uses the half-quadratic core `y^2/2` so that `L'' = 1`
//! there; the asymptotic constants downstream assume exactly that scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classical 95%-efficiency threshold for the Huber loss under Gaussian noise.
pub const HUBER_DEFAULT_C: f64 = 1.345;
/// Classical 95%-efficiency threshold for the Tukey loss under Gaussian noise.
pub const TUKEY_DEFAULT_C: f64 = 4.685;

/// A residual loss `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Loss {
    SquaredError,
    AbsoluteValue,
    Huber { c: f64 },
    Tukey { c: f64 },
}

impl Loss {
    pub fn squared() -> Self {
        Loss::SquaredError
    }

    pub fn absolute() -> Self {
        Loss::AbsoluteValue
    }

    /// Huber loss with threshold `c > 0`.
    pub fn huber(c: f64) -> Result<Self> {
        if c > 0.0 && c.is_finite() {
            Ok(Loss::Huber { c })
        } else {
            Err(Error::InvalidThreshold(c))
        }
    }

    /// Tukey biweight loss with threshold `c > 0`.
    pub fn tukey(c: f64) -> Result<Self> {
        if c > 0.0 && c.is_finite() {
            Ok(Loss::Tukey { c })
        } else {
            Err(Error::InvalidThreshold(c))
        }
    }

    /// L(r).
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Loss::SquaredError => r * r,
            Loss::AbsoluteValue => r.abs(),
            Loss::Huber { c } => {
                let a = r.abs();
                if a <= c {
                    0.5 * r * r
                } else {
                    c * a - 0.5 * c * c
                }
            }
            Loss::Tukey { c } => {
                let u = r / c;
                let u2 = u * u;
                if u2 <= 1.0 {
                    let w = 1.0 - u2;
                    1.0 - w * w * w
                } else {
                    1.0
                }
            }
        }
    }

    /// L'(r), with the symmetric subgradient convention `L'(0) = 0` for the
    /// absolute value. Odd: `L'(-r) = -L'(r)`.
    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        match *self {
            Loss::SquaredError => 2.0 * r,
            Loss::AbsoluteValue => {
                if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Loss::Huber { c } => {
                if r.abs() <= c {
                    r
                } else {
                    c * r.signum()
                }
            }
            Loss::Tukey { c } => {
                let u = r / c;
                let u2 = u * u;
                if u2 <= 1.0 {
                    let w = 1.0 - u2;
                    6.0 * r / (c * c) * w * w
                } else {
                    0.0
                }
            }
        }
    }

    /// L''(r) where it exists almost everywhere. At the Huber kinks
    /// `|r| = c` the value is the left limit (1). The absolute value has no
    /// usable second derivative; callers must branch to the dedicated
    /// closed-form constants instead.
    #[inline]
    pub fn d2(&self, r: f64) -> Result<f64> {
        match *self {
            Loss::SquaredError => Ok(2.0),
            Loss::AbsoluteValue => Err(Error::UnsupportedLoss(
                "absolute value loss has no second derivative; use the 1/(4 phi(0)^2) formulas",
            )),
            Loss::Huber { c } => Ok(if r.abs() <= c { 1.0 } else { 0.0 }),
            Loss::Tukey { c } => {
                let u2 = (r / c) * (r / c);
                if u2 <= 1.0 {
                    Ok(6.0 / (c * c) * (1.0 - u2) * (1.0 - 5.0 * u2))
                } else {
                    Ok(0.0)
                }
            }
        }
    }

    /// True if the loss is convex (squared, absolute, Huber).
    pub fn is_convex(&self) -> bool {
        !matches!(self, Loss::Tukey { .. })
    }

    /// sup |L'| when finite: 1 for absolute value, c for Huber, and the
    /// interior maximum of the Tukey score. None for squared error.
    pub fn d1_bound(&self) -> Option<f64> {
        match *self {
            Loss::SquaredError => None,
            Loss::AbsoluteValue => Some(1.0),
            Loss::Huber { c } => Some(c),
            // max at y = c/sqrt(5): (6/(c sqrt(5))) (4/5)^2
            Loss::Tukey { c } => Some(96.0 / (25.0 * 5f64.sqrt() * c)),
        }
    }

    /// Residual magnitudes where `L'` or `L''` has a kink, for quadrature
    /// panel splitting. Empty for the smooth squared loss.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            Loss::SquaredError => vec![],
            Loss::AbsoluteValue => vec![0.0],
            Loss::Huber { c } | Loss::Tukey { c } => vec![-c, c],
        }
    }

    /// Parse the CLI/config spelling: `squared`, `absolute`, `huber[:<c>]`,
    /// `tukey[:<c>]`. Omitting `c` selects the classical defaults.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let parse_c = |arg: Option<&str>, default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .parse::<f64>()
                    .map_err(|_| Error::BadConfig(format!("bad loss threshold: {s}"))),
            }
        };
        match name {
            "squared" => Ok(Loss::SquaredError),
            "absolute" => Ok(Loss::AbsoluteValue),
            "huber" => Loss::huber(parse_c(arg, HUBER_DEFAULT_C)?),
            "tukey" => Loss::tukey(parse_c(arg, TUKEY_DEFAULT_C)?),
            _ => Err(Error::BadConfig(format!("unknown loss: {s}"))),
        }
    }

    /// The CLI/config spelling of this loss.
    pub fn name(&self) -> String {
        match self {
            Loss::SquaredError => "squared".into(),
            Loss::AbsoluteValue => "absolute".into(),
            Loss::Huber { c } => format!("huber:{c}"),
            Loss::Tukey { c } => format!("tukey:{c}"),
        }
    }
}
