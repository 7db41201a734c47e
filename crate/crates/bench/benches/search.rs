//! End-to-end benchmarks over a 100K-document clustered index: the coarse
//! filter alone, then each full search mode, then the k sweep for two-stage.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hamsearch::{SearchIndex, SearchMode};
use hamsearch_bench::clustered_index;

const CLASSES: usize = 1_000;
const PER_CLASS: usize = 100;

fn fixture() -> (SearchIndex, Vec<hamsearch::LongCode>) {
    clustered_index(CLASSES, PER_CLASS, 1, 42)
}

fn bench_coarse_filter(c: &mut Criterion) {
    let (index, queries) = fixture();
    let extractor = index.config().extractor.clone();
    let shorts: Vec<_> = queries.iter().map(|query| extractor.extract(query)).collect();

    let mut cursor = 0usize;
    c.bench_function("coarse_filter/100k", |bencher| {
        bencher.iter(|| {
            let short = &shorts[cursor % shorts.len()];
            cursor += 1;
            index.coarse_filter(black_box(short)).len()
        })
    });
}

fn bench_search_modes(c: &mut Criterion) {
    let (index, queries) = fixture();
    let mut group = c.benchmark_group("search_100k_k10");

    for mode in [SearchMode::Short, SearchMode::TwoStage, SearchMode::Long] {
        let mut cursor = 0usize;
        group.bench_function(format!("{mode}"), |bencher| {
            bencher.iter(|| {
                let query = &queries[cursor % queries.len()];
                cursor += 1;
                index.search(black_box(query), 10, mode).unwrap().len()
            })
        });
    }

    group.finish();
}

fn bench_k_sweep(c: &mut Criterion) {
    let (index, queries) = fixture();
    let mut group = c.benchmark_group("twostage_100k");

    for k in [10usize, 100, 1_000] {
        let mut cursor = 0usize;
        group.bench_function(format!("k{k}"), |bencher| {
            bencher.iter(|| {
                let query = &queries[cursor % queries.len()];
                cursor += 1;
                index.search(black_box(query), k, SearchMode::TwoStage).unwrap().len()
            })
        });
    }

    group.finish();
}

criterion_group!(search, bench_coarse_filter, bench_search_modes, bench_k_sweep);
criterion_main!(search);
