//! Shared fixtures for the criterion benches.

use tmatch_core::datagen::{generate_shift, Dataset};
use tmatch_core::distributions::{DesignMode, DesignModel, NoiseModel};
use tmatch_core::rng::derive_rng;
use tmatch_core::templates::Template;

/// A reproducible noisy dataset for the named built-in template.
pub fn fixture(template: &str, n: usize, seed: u64) -> (Template, Dataset) {
    let t = Template::builtin(template).expect("builtin");
    let ds = generate_shift(
        &t,
        0.0,
        &DesignModel::unit(),
        &NoiseModel::Gaussian { sigma: 1.0 },
        n,
        DesignMode::Random,
        &mut derive_rng(seed, 0),
    )
    .expect("dataset");
    (t, ds)
}
