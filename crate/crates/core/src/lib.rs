//! Robust template matching and change-point localization by M-estimation.
//!
//! The library fits a known template to a noisy 1D signal by minimizing an
//! empirical risk under a choice of robust losses, computes the matching
//! asymptotic theory (limiting variances, convergence rates, marked-Poisson
//! limit processes), and provides a seeded Monte Carlo harness to verify
//! the theory against simulation.
//!
//! Organization:
//! - [`losses`]: squared, absolute, Huber and Tukey losses with derivatives.
//! - [`templates`]: piecewise-polynomial templates with declared jumps.
//! - [`distributions`]: noise and design families (samplers, densities,
//!   CDFs).
//! - [`datagen`]: dataset generation for the shift, amplitude-location-scale
//!   and agnostic models.
//! - [`estimator`]: breakpoint-aware global fits for all three models.
//! - [`theory`]: asymptotic constants by closed form or deterministic
//!   quadrature.
//! - [`limitlaw`]: simulation of the non-smooth (marked Poisson) limit law.
//! - [`experiments`]: the Monte Carlo harness and the numerical-study
//!   tables.

pub mod datagen;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod limitlaw;
pub mod losses;
pub mod quad;
pub mod rng;
pub mod templates;
pub mod theory;

pub use datagen::{Dataset, DatasetMeta, ModelTag};
pub use distributions::{DesignMode, DesignModel, NoiseModel};
pub use error::{Error, Result};
pub use estimator::{
    fit_location_scale, fit_periodic_correlation, fit_shift, objective, EstimationResult,
    LocationScaleResult, LsSearchConfig, PeriodicFit, SearchConfig,
};
pub use losses::Loss;
pub use templates::{Discontinuity, Piece, Smoothness, Template};
pub use theory::{AsymptoticReport, LocationScaleAsymptotics};
