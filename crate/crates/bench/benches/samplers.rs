use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use finitary::clusters::{label_clusters, CrossingScratch};
use finitary::ising::{cftp_vertex_with, sample_window_store, CoupledStore, IsingParams, DEFAULT_T_MAX};
use finitary::models::bernoulli_field;
use finitary::{Adjacency, RealizationStore, Rect, Spin, Vertex};
use std::hint::black_box;

fn cftp(c: &mut Criterion) {
    let params = IsingParams::new(0.3, 0.0).unwrap();
    let mut replica = 0;
    c.bench_function("cftp_vertex beta=0.3", |b| {
        b.iter(|| {
            replica += 1;
            let store = RealizationStore::new(1, replica);
            black_box(cftp_vertex_with(Vertex::ORIGIN, &CoupledStore(&store), &params, DEFAULT_T_MAX).unwrap())
        })
    });
    let mut group = c.benchmark_group("sample_window beta=0.3");
    group.sample_size(20);
    for n in [8u32, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut replica = 0;
            b.iter(|| {
                replica += 1;
                let store = RealizationStore::new(2, replica);
                black_box(sample_window_store(Rect::centered(n), &store, &params, DEFAULT_T_MAX).unwrap())
            })
        });
    }
    group.finish();
}

fn clusters(c: &mut Criterion) {
    let rect = Rect::box_nm(255, 255);
    let field = bernoulli_field(rect, &RealizationStore::new(3, 0), 0.2);
    c.bench_function("label_clusters 256x256 star", |b| b.iter(|| black_box(label_clusters(&field, Spin::Minus, Adjacency::Star))));
    let mut scratch = CrossingScratch::default();
    c.bench_function("duality_audit 256x256", |b| b.iter(|| black_box(scratch.duality_audit(&field, &rect).unwrap())));
}

criterion_group!(benches, cftp, clusters);
criterion_main!(benches);
