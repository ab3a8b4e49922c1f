use brent_bench::{laderman, natural};
use brent_core::rank::{rank_exact, rank_modular, rank_numeric};
use brent_core::structure::analyze_properties;
use brent_core::{builtin_strassen, jacobian, residual, TolerancePolicy};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for (name, q) in [("strassen", builtin_strassen()), ("laderman", laderman()), ("natural444", natural(4, 4, 4))] {
        group.bench_with_input(BenchmarkId::new("residual", name), &q, |b, q| b.iter(|| residual(black_box(q))));
        group.bench_with_input(BenchmarkId::new("jacobian", name), &q, |b, q| b.iter(|| jacobian(black_box(q))));
    }
    group.finish();
}

fn rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank");
    group.sample_size(10);
    for (name, q) in [("strassen", builtin_strassen()), ("laderman", laderman())] {
        let j = jacobian(&q);
        group.bench_with_input(BenchmarkId::new("exact", name), &j, |b, j| b.iter(|| rank_exact(j)));
        group.bench_with_input(BenchmarkId::new("modular3", name), &j, |b, j| {
            b.iter(|| rank_modular(j, 3, 0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("numeric", name), &j, |b, j| {
            b.iter(|| rank_numeric(j, TolerancePolicy::Auto))
        });
    }
    group.finish();
}

fn properties(c: &mut Criterion) {
    let q = laderman();
    c.bench_function("properties/laderman", |b| b.iter(|| analyze_properties(black_box(&q))));
}

criterion_group!(benches, assembly, rank, properties);
criterion_main!(benches);
