use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use temport_bench::fixture;
use temport_core::events::{extract_events, g_squared, ContingencyTable};
use temport_core::midat::{infer_constrained, MiDaTConfig};
use temport_core::multit::{infer_clamped, infer_free};

fn benches(c: &mut Criterion) {
    let f = fixture(3000);
    let positives: Vec<_> = f.bags.iter().filter(|b| !b.label.is_empty()).take(200).collect();

    c.bench_function("g_squared", |b| {
        let t = ContingencyTable::new(40, 160, 300, 99_500);
        b.iter(|| g_squared(black_box(&t)))
    });
    c.bench_function("extract_events_3k", |b| b.iter(|| extract_events(black_box(&f.corpus), 10_000, 3)));
    c.bench_function("infer_free_200", |b| {
        b.iter(|| positives.iter().map(|bag| infer_free(&f.recognizer, &bag.tweet).len()).sum::<usize>())
    });
    c.bench_function("infer_clamped_200", |b| {
        b.iter(|| positives.iter().filter_map(|bag| infer_clamped(&f.recognizer, &bag.tweet, &bag.label).ok()).count())
    });
    let midat = MiDaTConfig::new(-25.0, 500.0);
    c.bench_function("midat_local_search_200", |b| {
        b.iter(|| positives.iter().map(|bag| infer_constrained(&f.recognizer, &midat, &bag.tweet, &bag.label).len()).sum::<usize>())
    });
    let tagged: Vec<_> = positives.iter().map(|bag| (bag, infer_free(&f.recognizer, &bag.tweet))).collect();
    c.bench_function("normalizer_score_200", |b| {
        b.iter(|| tagged.iter().map(|(bag, z)| f.normalizer.score(&bag.tweet, z, &[]).decode(0.5).date_set().len()).sum::<usize>())
    });
}

criterion_group! {
    name = pipeline;
    config = Criterion::default().sample_size(20);
    targets = benches
}
criterion_main!(pipeline);
