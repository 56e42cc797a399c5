//! Hot kernels on a one-thread pool against the default pool. Build with
//! `--no-default-features` for the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;

use besov_core::conv::conv_field;
use besov_core::diff::delta_field;
use besov_core::mollifier::build_mollifier;
use besov_core::spline::spline_decompose;
use besov_core::GridFunction;

fn sample(dim: usize, level: u32) -> GridFunction {
    GridFunction::from_fn(dim, level, 2.0, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (1.0 - r2).max(0.0).powi(3) * (5.0 * x[0]).cos()
    })
    .unwrap()
}

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let mut out = vec![("1-thread".to_string(), ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    let pool = ThreadPoolBuilder::new().build().unwrap();
    out.push((format!("default-{}t", pool.current_num_threads()), pool));
    out
}

fn kernels(c: &mut Criterion) {
    let f1 = sample(1, 11);
    let f2 = sample(2, 6);
    let mol1 = build_mollifier(1, 2, 0.75).unwrap();
    let mol2 = build_mollifier(2, 2, 0.75).unwrap();
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("conv_field_1d", &name), |b| {
            b.iter(|| pool.install(|| conv_field(&f1, &mol1, 6).unwrap()))
        });
        g.bench_function(BenchmarkId::new("conv_field_2d", &name), |b| {
            b.iter(|| pool.install(|| conv_field(&f2, &mol2, 3).unwrap()))
        });
        g.bench_function(BenchmarkId::new("delta_field_2d", &name), |b| {
            b.iter(|| pool.install(|| delta_field(&f2, 1, 2, 1.0).unwrap()))
        });
        g.bench_function(BenchmarkId::new("spline_decompose_2d", &name), |b| {
            b.iter(|| pool.install(|| spline_decompose(&f2, 2, 3, 1.0).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
