use criterion::{criterion_group, criterion_main, Criterion};
use finitary::ising::IsingLevels;
use finitary::representation::Logistic;
use finitary::threshold::{corollary_interval_report, enumerate, EventSpec};
use std::hint::black_box;

fn enumeration(c: &mut Criterion) {
    let maj9 = EventSpec::builtin("maj9").unwrap();
    c.bench_function("enumerate maj9", |b| b.iter(|| black_box(enumerate(&maj9, &Logistic, 0.1).unwrap())));
    let tribes = EventSpec::builtin("tribes_2_3").unwrap();
    c.bench_function("interval report tribes_2_3", |b| {
        b.iter(|| black_box(corollary_interval_report(&tribes, &Logistic, -0.5, 0.5).unwrap()))
    });
    let spin = EventSpec::from_fn("or3_k5", 3, 5, true, |w| w.iter().any(|&x| x >= 3)).unwrap();
    let levels = IsingLevels::new(0.3).unwrap();
    c.bench_function("enumerate k=5 n=3", |b| b.iter(|| black_box(enumerate(&spin, &levels, 0.0).unwrap())));
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
