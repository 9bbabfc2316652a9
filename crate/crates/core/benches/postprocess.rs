use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use wyckit::codec::{parse_wyckoff, reconstruct};
use wyckit::geometry::{dedupe, MatchTolerances, ReferenceIndex};
use wyckit::{Crystal, Exec, Site};

#[path = "../tests/common/mod.rs"]
mod common;

fn batch(n: usize) -> Vec<Crystal> {
    let bases: Vec<Crystal> = [common::HO_AL_NI, common::MN_O_F, common::TI_NI_SN]
        .iter()
        .map(|t| reconstruct(&parse_wyckoff(t).unwrap()).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|i| {
            let base = &bases[i % 3];
            let shift: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let jitter = if i % 2 == 0 { 0.0 } else { 0.05 };
            let sites = base
                .sites
                .iter()
                .enumerate()
                .map(|(k, s)| Site::new(s.element, [0, 1, 2].map(|d| s.frac[d] + shift[d] + if k == 0 { jitter } else { 0.0 })))
                .collect();
            Crystal::new(base.lattice, sites).unwrap()
        })
        .collect()
}

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn bench_dedupe(c: &mut Criterion) {
    let crystals = batch(60);
    let tol = MatchTolerances::default();
    let mut group = c.benchmark_group("dedupe");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| dedupe(black_box(&crystals), &tol, exec))
        });
    }
    group.finish();
}

fn bench_reference_index(c: &mut Criterion) {
    let entries: Vec<(String, Crystal)> = batch(300).into_iter().enumerate().map(|(i, c)| (format!("r{i}"), c)).collect();
    let mut group = c.benchmark_group("reference_index");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| ReferenceIndex::new(black_box(entries.clone()), MatchTolerances::default(), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_dedupe, bench_reference_index);
criterion_main!(benches);
