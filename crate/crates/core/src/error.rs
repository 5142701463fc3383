use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The loss has no (a.e.) second derivative usable here.
    #[error("unsupported loss for this operation: {0}")]
    UnsupportedLoss(&'static str),
    /// A loss threshold must be strictly positive.
    #[error("loss threshold must be > 0, got {0}")]
    InvalidThreshold(f64),
    /// A template name that is not one of the built-ins.
    #[error("unknown template: {0}")]
    UnknownTemplate(String),
    /// A dataset with no observations.
    #[error("empty dataset")]
    EmptyDataset,
    /// Search bounds are empty or non-finite.
    #[error("degenerate search bounds [{0}, {1}]")]
    DegenerateBounds(f64, f64),
    /// A parameter box that is empty or places nu at or below zero.
    #[error("invalid parameter bounds: {0}")]
    InvalidBounds(String),
    /// The scale parameter of the location-scale model must be positive.
    #[error("scale parameter must be > 0, got {0}")]
    InvalidScale(f64),
    /// The correlation estimator requires design points on the regular grid i/n.
    #[error("design points are not the regular grid i/n")]
    NotRegularGrid,
    /// A moment required by the requested constant does not exist.
    #[error("required noise moment is infinite: {0}")]
    InfiniteMoment(&'static str),
    /// The aggregate curvature E[L''(Z)] vanished or went negative.
    #[error("expected curvature E[L''(Z)] is not positive ({0})")]
    ZeroCurvature(f64),
    /// The shift variance formula needs a Lipschitz template.
    #[error("template is not Lipschitz; no sqrt(n) normal limit")]
    NonSmoothTemplate,
    /// The (loss, noise) pair violates the moment condition for this quantity.
    #[error("inadmissible loss/noise pair: {0}")]
    InadmissiblePair(&'static str),
    /// Requested a jump-driven quantity for a template without discontinuities.
    #[error("template has no discontinuity")]
    NoDiscontinuity,
    /// Adaptive quadrature exceeded its panel budget before converging.
    #[error("quadrature panel budget exhausted (error estimate {0:.3e})")]
    QuadraturePanelCap(f64),
    /// The simulated limit process never localized its minimum.
    #[error("minimizer window exploded after {0} doublings; E[mark] <= 0?")]
    WindowExplosion(u32),
    /// A statistic over an empty sample.
    #[error("empty sample")]
    EmptySample,
    /// Rate regression needs positive inputs.
    #[error("rate slope requires >= 3 strictly positive points")]
    NonPositiveInput,
    /// Malformed configuration string such as a loss or noise name.
    #[error("bad config value: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
