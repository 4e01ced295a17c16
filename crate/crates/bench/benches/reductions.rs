use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ironing_bench::{random_table, uniform_prior, zigzag_curve};
use ironing_core::algorithms;
use ironing_core::ideal::{self, convex_hull, cumulative_curve, exact_interim_curve};
use ironing_core::oracle::{estimate_rule, PieceStructure};
use ironing_core::{Algorithm, RandomStream};

fn hull(c: &mut Criterion) {
    let mut group = c.benchmark_group("hull");
    for m in [16, 256, 4096] {
        let (d, curve) = zigzag_curve(m);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| convex_hull(&cumulative_curve(black_box(&curve), &d)))
        });
    }
    group.finish();
}

fn exact_curves(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_interim_curve");
    for (n, m) in [(2, 8), (3, 8), (4, 6)] {
        let prior = uniform_prior(n, m);
        let table = random_table(prior.clone(), 1);
        let ironed = ideal::ideal_ironed_algorithm(Arc::new(table.clone()), prior.clone()).expect("irons");
        group.bench_function(BenchmarkId::new("raw", format!("{n}x{m}")), |b| {
            b.iter(|| exact_interim_curve(black_box(&table), &prior, 0))
        });
        group.bench_function(BenchmarkId::new("ironed", format!("{n}x{m}")), |b| {
            b.iter(|| exact_interim_curve(black_box(ironed.algorithm.as_ref() as &dyn Algorithm), &prior, 0))
        });
    }
    group.finish();
}

fn estimation(c: &mut Criterion) {
    let (prior, table) = algorithms::two_bidder_worst_case();
    let pieces = PieceStructure::atoms(&prior);
    let mut group = c.benchmark_group("estimate_rule");
    group.sample_size(10);
    for eps in [0.2, 0.1] {
        group.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &eps| {
            b.iter(|| estimate_rule(&table, &prior, &pieces, eps, &RandomStream::new(0)))
        });
    }
    group.finish();
}

criterion_group!(benches, hull, exact_curves, estimation);
criterion_main!(benches);
