use tmatch_core::experiments::{run_monte_carlo, ExperimentConfig, Scaling};
use tmatch_core::losses::Loss;
use tmatch_core::distributions::NoiseModel;

fn main() {
    for (tname, loss, noise, label, cell) in [
        ("C", Loss::Tukey { c: 4.685 }, NoiseModel::Gaussian { sigma: 1.0 }, "C/normal/tukey", 2.120),
        ("C", Loss::Huber { c: 1.345 }, NoiseModel::StudentT { nu: 3.0 }, "C/t3/huber", 3.550),
        ("C", Loss::Huber { c: 1.345 }, NoiseModel::Cauchy, "C/cauchy/huber", 3.310),
        ("D", Loss::SquaredError, NoiseModel::StudentT { nu: 3.0 }, "D/t3/squared", 1.802),
    ] {
        let mut cfg = ExperimentConfig::shift_scenario(tname, loss, noise, Scaling::N);
        cfg.repeats = 1000;
        cfg.seed = 4242;
        let r = run_monte_carlo(&cfg).unwrap();
        let m = r.per_n[0].mean_abs_scaled_error;
        let band = (0.75 * cell, 1.25 * cell);
        println!("{label}: 1000-rep mean {m:.3}, paper {cell}, band [{:.3}, {:.3}] -> {}",
            band.0, band.1, if m >= band.0 && m <= band.1 { "inside" } else { "OUTSIDE" });
    }
}
