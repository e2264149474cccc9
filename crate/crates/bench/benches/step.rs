use std::hint::black_box;

use chns_bench::{benchmark_state, two_level_state};
use chns_core::elliptic::{project, solve_ch_system, ChOperatorSpec};
use chns_core::msav_first::step_first_order;
use chns_core::msav_second::step_second_order;
use chns_core::{CellField, StepOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const DT: f64 = 0.0125;

fn steps(c: &mut Criterion) {
    let opts = StepOptions::default();
    let mut g = c.benchmark_group("step");
    g.sample_size(20);
    for n in [32, 64, 160] {
        let (p, s) = benchmark_state(n);
        g.bench_with_input(BenchmarkId::new("msav1", n), &s, |b, s| {
            b.iter(|| step_first_order(black_box(s), &p, DT, &opts).unwrap())
        });
        let (p, s2) = two_level_state(n, DT);
        g.bench_with_input(BenchmarkId::new("msav2", n), &s2, |b, s2| {
            b.iter(|| step_second_order(black_box(s2), &p, DT, &opts).unwrap())
        });
    }
    g.finish();
}

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for n in [64, 160] {
        let (p, s) = benchmark_state(n);
        let spec = ChOperatorSpec::new(p.mobility * DT, p.gamma_eff()).unwrap();
        let rhs: CellField = s.phi.clone();
        g.bench_function(BenchmarkId::new("cahn_hilliard_dct", n), |b| {
            b.iter(|| solve_ch_system(&spec, black_box(&rhs), 1e-12).unwrap())
        });
        let w = s.u.map(|x| x + 0.1);
        g.bench_function(BenchmarkId::new("projection", n), |b| {
            b.iter(|| project(black_box(&w), DT, 1e-12).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, steps, solvers);
criterion_main!(benches);
