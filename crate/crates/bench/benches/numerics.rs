use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use fhl_bench::hermitian_fixture;
use fhl_core::oscillation::{disk_rule, DiskSample};
use fhl_core::spectra::jacobi_eigen;
use fhl_core::{
    single_frequency_spectrum_of, Complex64, FockBasis, HankelModel, QuadratureRule, Symbol,
};

fn jacobi(c: &mut Criterion) {
    let m = hermitian_fixture(64);
    c.bench_function("jacobi_64", |b| {
        b.iter(|| jacobi_eigen(black_box(&m), 1e-14).unwrap())
    });
}

fn closed_form(c: &mut Criterion) {
    let basis = FockBasis::classical(501);
    let bar = Symbol::xia().conj();
    c.bench_function("single_frequency_k500", |b| {
        b.iter(|| single_frequency_spectrum_of(black_box(&bar), &basis, 500).unwrap())
    });
}

fn dense(c: &mut Criterion) {
    let basis = Arc::new(FockBasis::classical(60));
    let rule = QuadratureRule::default();
    let sym = Symbol::xia().conj();
    let mut group = c.benchmark_group("dense_hankel");
    group.sample_size(20);
    group.bench_function("n24_m40", |b| {
        b.iter(|| {
            HankelModel::new(basis.clone(), sym.clone(), 24, 40, &rule)
                .unwrap()
                .singular_values()
                .unwrap()
        })
    });
    group.finish();
}

fn oscillation(c: &mut Criterion) {
    let rule = disk_rule(&QuadratureRule::default(), 25);
    let sym = Symbol::xia();
    let z = Complex64::new(1.5, 0.5);
    c.bench_function("g_functional_d25", |b| {
        b.iter(|| {
            DiskSample::new(&sym, black_box(z), 1.0, &rule)
                .unwrap()
                .g(2.0, 25, 1e-9)
        })
    });
    c.bench_function("g_functional_q1_d8", |b| {
        b.iter(|| {
            DiskSample::new(&sym, black_box(z), 1.0, &rule)
                .unwrap()
                .g(1.0, 8, 1e-9)
        })
    });
}

criterion_group!(benches, jacobi, closed_form, dense, oscillation);
criterion_main!(benches);
