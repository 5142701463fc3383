use std::time::Instant;
use tmatch_core::datagen::generate_shift;
use tmatch_core::distributions::{DesignMode, DesignModel, NoiseModel};
use tmatch_core::rng::derive_rng;
use tmatch_core::{fit_shift, fit_location_scale, Loss, LsSearchConfig, SearchConfig, Template};

fn main() {
    let unit = DesignModel::unit();
    let gauss = NoiseModel::Gaussian { sigma: 1.0 };
    let t3 = NoiseModel::StudentT { nu: 3.0 };
    let cfg = SearchConfig::default();
    for (tname, lname, loss, noise) in [
        ("A", "squared", Loss::SquaredError, &gauss),
        ("B", "tukey", Loss::Tukey { c: 4.685 }, &t3),
        ("C", "squared", Loss::SquaredError, &gauss),
        ("C", "absolute", Loss::AbsoluteValue, &t3),
        ("D", "huber", Loss::Huber { c: 1.345 }, &t3),
        ("E", "squared", Loss::SquaredError, &gauss),
        ("E", "absolute", Loss::AbsoluteValue, &t3),
        ("E", "tukey", Loss::Tukey { c: 4.685 }, &t3),
    ] {
        let t = Template::builtin(tname).unwrap();
        let ds = generate_shift(&t, 0.0, &unit, noise, 10_000, DesignMode::Random, &mut derive_rng(1, 0)).unwrap();
        let start = Instant::now();
        let reps = 5;
        for r in 0..reps {
            let ds2 = generate_shift(&t, 0.0, &unit, noise, 10_000, DesignMode::Random, &mut derive_rng(1, r)).unwrap();
            let _ = fit_shift(&ds2, &t, &loss, &cfg).unwrap();
        }
        println!("{tname}/{lname} n=1e4: {:.1} ms/fit (incl datagen)", start.elapsed().as_secs_f64() * 1000.0 / reps as f64);
        let _ = ds;
    }
    // location-scale, squared, template C
    let c = Template::builtin("C").unwrap();
    let start = Instant::now();
    for r in 0..3 {
        let ds = tmatch_core::datagen::generate_location_scale(&c, (1.0, 0.0, 1.0), &unit, &gauss, 10_000, DesignMode::Random, &mut derive_rng(2, r)).unwrap();
        let f = fit_location_scale(&ds, &c, &Loss::SquaredError, &LsSearchConfig::default()).unwrap();
        if r == 0 { println!("  ls sample: beta {:.4} xi {:.2e} nu {:.6} evals {}", f.beta_hat, f.xi_point_estimate(), f.nu_point_estimate(), f.evaluations); }
    }
    println!("C/ls squared n=1e4: {:.1} ms/fit", start.elapsed().as_secs_f64() * 1000.0 / 3.0);
}
