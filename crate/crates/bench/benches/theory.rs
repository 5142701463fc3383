use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tmatch_core::theory::{c_phi_loss, delta, population_risk_gap};
use tmatch_core::{DesignModel, Loss, NoiseModel, Template};

fn bench_theory(c: &mut Criterion) {
    let unit = DesignModel::unit();
    let t3 = NoiseModel::StudentT { nu: 3.0 };
    let tukey = Loss::Tukey { c: 4.685 };
    c.bench_function("c_phi_tukey_t3", |b| {
        b.iter(|| c_phi_loss(black_box(&tukey), &t3).unwrap())
    });

    let tc = Template::builtin("C").unwrap();
    c.bench_function("delta_C", |b| {
        b.iter(|| delta(black_box(&tc), &unit, 0.1, 0.0).unwrap())
    });

    let ta = Template::builtin("A").unwrap();
    let gauss = NoiseModel::Gaussian { sigma: 1.0 };
    c.bench_function("risk_gap_A_huber", |b| {
        b.iter(|| {
            population_risk_gap(
                black_box(&ta),
                &unit,
                &Loss::Huber { c: 1.345 },
                &gauss,
                1e-3,
                0.0,
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_theory);
criterion_main!(benches);
