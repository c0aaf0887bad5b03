use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hcwalk_core::ensemble::realization_observables;
use hcwalk_core::openprop::{build_absorbing_hamiltonian, propagate_absorbing, ScatterSetup};
use hcwalk_core::{build_hamiltonian, eigendecompose, evolve, HoppingMode, ModelSpec, PairState};

fn dipolar(n: usize, v: f64) -> ModelSpec {
    ModelSpec::new(n, HoppingMode::PowerLaw { alpha: 3.0 }, 3.0, v).unwrap()
}

fn hamiltonian(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_hamiltonian");
    for n in [20, 50] {
        let spec = dipolar(n, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, s| {
            b.iter(|| build_hamiltonian(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    for n in [20, 50] {
        let h = build_hamiltonian(&dipolar(n, 1.0)).unwrap();
        group.bench_with_input(BenchmarkId::new("eigendecompose", n), &h, |b, h| {
            b.iter(|| eigendecompose(black_box(h)).unwrap())
        });
        let d = eigendecompose(&h).unwrap();
        let psi0 = PairState::localized(h.basis, n / 2 - 1, n / 2).unwrap();
        group.bench_with_input(BenchmarkId::new("evolve", n), &psi0, |b, psi0| {
            b.iter(|| evolve(&d, black_box(psi0), 1e4).unwrap())
        });
    }
    group.finish();
}

fn disorder_realization(c: &mut Criterion) {
    let spec = dipolar(50, 1.0)
        .with_vacancies([3, 11, 30, 38, 47])
        .unwrap();
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    group.bench_function("realization_n50", |b| {
        b.iter(|| realization_observables(black_box(&spec), (24, 25), 2, &[1e4]).unwrap())
    });
    group.finish();
}

fn absorbing(c: &mut Criterion) {
    let setup = ScatterSetup::new(dipolar(41, 2.0), (9, 30), (19, 20), 1.0, 1.0).unwrap();
    let hc = build_absorbing_hamiltonian(&setup).unwrap();
    let psi0 = setup.initial_state().unwrap();
    let mut group = c.benchmark_group("absorbing");
    group.sample_size(10);
    group.bench_function("rk4_tau1_n41", |b| {
        b.iter(|| propagate_absorbing(&hc, black_box(&psi0), 1.0, 1e-3).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    hamiltonian,
    spectral,
    disorder_realization,
    absorbing
);
criterion_main!(benches);
