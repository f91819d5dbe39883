//! Hot-path benchmarks: the O(n) recurrence sweeps that the million-depth
//! experiments lean on, plus the bisection eigensolver and the model fit.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use jspec_core::cauchy::cauchy_via_logderiv;
use jspec_core::orthopoly::{cd_kernel_diag, eval_pn, gauss_quadrature};
use jspec_core::params::JacobiFamily;
use jspec_core::spectra::{self, CountingQuery};
use jspec_core::transfer::{h_estimate, levinson_ratio_product};
use num_complex::Complex64;
use std::hint::black_box;

fn bench_sturm(c: &mut Criterion) {
    let fam = JacobiFamily::hermite();
    c.bench_function("sturm_count hermite n=100k", |b| {
        b.iter(|| spectra::sturm_count(&fam, black_box(100_000), black_box(0.5)))
    });
    c.bench_function("count_in_interval hermite n=1M", |b| {
        let q = CountingQuery::new(1_000_000, -1.0, 1.0);
        b.iter(|| spectra::count_in_interval(&fam, black_box(&q)))
    });
}

fn bench_eigenvalues(c: &mut Criterion) {
    let fam = JacobiFamily::chebyshev();
    let mut g = c.benchmark_group("eigenvalues");
    g.sample_size(10);
    g.bench_function("chebyshev n=2000", |b| {
        b.iter_batched(
            || (),
            |_| spectra::eigenvalues(&fam, black_box(2000), 1e-12).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn bench_recurrences(c: &mut Criterion) {
    let fam = JacobiFamily::hermite();
    let z = Complex64::new(0.0, 1.0);
    c.bench_function("eval_pn hermite n=1M", |b| {
        b.iter(|| eval_pn(&fam, black_box(1_000_000), black_box(z)))
    });
    c.bench_function("cauchy_via_logderiv hermite n=1M", |b| {
        b.iter(|| cauchy_via_logderiv(&fam, black_box(1_000_000), black_box(z)))
    });
    c.bench_function("cd_kernel_diag hermite n=20k", |b| {
        b.iter(|| cd_kernel_diag(&fam, black_box(20_000), black_box(0.0)))
    });
}

fn bench_asymptotics(c: &mut Criterion) {
    let mut g = c.benchmark_group("asymptotics");
    g.sample_size(10);
    let hermite = JacobiFamily::hermite();
    let synth = JacobiFamily::synthetic_iia();
    let z = Complex64::new(0.0, 1.0);
    g.bench_function("levinson hermite j=20k", |b| {
        b.iter(|| levinson_ratio_product(&hermite, black_box(z), 1, black_box(20_000)).unwrap())
    });
    let grid = [
        Complex64::new(-1.0, 0.0),
        Complex64::new(-0.5, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(1.0, 0.0),
    ];
    g.bench_function("h_estimate synthetic j=20k", |b| {
        b.iter(|| h_estimate(&synth, black_box(&grid), black_box(20_000)).unwrap())
    });
    g.bench_function("gauss_quadrature laguerre n=500", |b| {
        b.iter(|| gauss_quadrature(&JacobiFamily::laguerre(), black_box(500)).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_sturm,
    bench_eigenvalues,
    bench_recurrences,
    bench_asymptotics
);
criterion_main!(benches);
