use criterion::{criterion_group, criterion_main, Criterion};
use loopforge::exact::{enum_dimer_covers, fkt_count, mdd_enumerate};
use loopforge::fourier::property_sweep;
use loopforge::mcmc::sample_mdd;
use loopforge::spin::quadrature::Quadrature;
use loopforge::spin::verify::Verifier;
use loopforge::Graph;
use loopforge_bench::{oracle_graphs, short_chain, spin_point};
use std::hint::black_box;

fn oracles(c: &mut Criterion) {
    c.bench_function("fkt 8x8", |b| b.iter(|| fkt_count(black_box(8), 8).unwrap()));
    for g in oracle_graphs() {
        c.bench_function(&format!("enumerate covers {}", g.name()), |b| b.iter(|| enum_dimer_covers(&g).unwrap()));
    }
    let c4 = Graph::cycle(4).unwrap();
    c.bench_function("mdd enumerate C4", |b| b.iter(|| mdd_enumerate(&c4).unwrap()));
}

fn spin(c: &mut Criterion) {
    let (u, p) = spin_point();
    let g = Graph::k2();
    c.bench_function("spin verifier K2", |b| {
        b.iter(|| Verifier::new(&g, &u, p, Quadrature::default_for(2)).unwrap().run_all().unwrap())
    });
}

fn fourier(c: &mut Criterion) {
    c.bench_function("fourier sweep 100 cases", |b| b.iter(|| property_sweep(&[8, 16, 32], 100, 1).unwrap()));
}

fn worm(c: &mut Criterion) {
    let mut group = c.benchmark_group("worm");
    group.sample_size(10);
    for l in [8, 16] {
        let g = Graph::slab_torus(l, 1).unwrap();
        group.bench_function(format!("2000 sweeps torus {l}x1"), |b| b.iter(|| sample_mdd(&g, &short_chain(1.0)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, oracles, spin, fourier, worm);
criterion_main!(benches);
