use criterion::{black_box, criterion_group, criterion_main, Criterion};

use stein_bounds::bounds::wasserstein_bounds;
use stein_bounds::oracle::oracle_cdf;
use stein_bounds::stein::SteinKernel;
use stein_bounds::{Distribution, QuadratureConfig};

fn bench_kernel_eval(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let sn = Distribution::skew_normal(0.0, 1.0, 2.0, &cfg).unwrap();
    let kernel = SteinKernel::new(&sn, &cfg).unwrap();
    c.bench_function("numeric_kernel_eval", |b| {
        b.iter(|| black_box(kernel.eval(black_box(0.7))))
    });
}

fn bench_bounds(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let p1 = Distribution::normal(0.0, 1.0).unwrap();
    let p2 = Distribution::skew_normal(0.0, 1.0, 1.0, &cfg).unwrap();
    c.bench_function("bounds_normal_vs_skew_normal", |b| {
        b.iter(|| black_box(wasserstein_bounds(&p1, &p2, &cfg).unwrap()))
    });
}

fn bench_oracle(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let p1 = Distribution::gamma(21.0, 0.1).unwrap();
    let p2 = Distribution::gamma(21.0, 1.0 / 11.0).unwrap();
    c.bench_function("oracle_cdf_gamma_pair", |b| {
        b.iter(|| black_box(oracle_cdf(&p1, &p2, &cfg).unwrap()))
    });
}

fn bench_custom_construction(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    c.bench_function("custom_posterior_build", |b| {
        b.iter(|| {
            black_box(
                Distribution::custom_log(
                    std::sync::Arc::new(|t: f64| -11.0 * t + 20.0 * t.ln()),
                    stein_bounds::SupportInterval::positive(),
                    &cfg,
                )
                .unwrap(),
            )
        })
    });
}

criterion_group!(benches, bench_kernel_eval, bench_bounds, bench_oracle, bench_custom_construction);
criterion_main!(benches);
