use std::hint::black_box;

use araoc_core::gen::{derive_seed, gen_task, task_id, Ranges};
use araoc_core::{Family, Variant};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn single_task(c: &mut Criterion) {
    let mut group = c.benchmark_group("gen_task");
    for family in Family::ATOMIC {
        let ranges = Ranges::standard(family);
        group.bench_with_input(BenchmarkId::from_parameter(family), &family, |b, &family| {
            let mut i = 0usize;
            b.iter(|| {
                i += 1;
                let seed = derive_seed(42, Variant::Standard, family, i, 0);
                black_box(gen_task(family, Variant::Standard, &ranges, task_id(Variant::Standard, family, i), seed).unwrap())
            })
        });
    }
    group.finish();
}

fn composition(c: &mut Criterion) {
    let ranges = Ranges::standard(Family::Composition);
    c.bench_function("gen_task/composition", |b| {
        let mut i = 0usize;
        b.iter(|| {
            i += 1;
            let seed = derive_seed(42, Variant::Composition, Family::Composition, i, 0);
            black_box(gen_task(Family::Composition, Variant::Composition, &ranges, format!("c-{i}"), seed).unwrap())
        })
    });
}

criterion_group!(benches, single_task, composition);
criterion_main!(benches);
