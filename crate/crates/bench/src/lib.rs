//! Shared setup for the step benchmarks.

use chns_core::msav_second::{bootstrap, SchemeState2};
use chns_core::{GridSpec, InitialData, PhysParams, SchemeState, StepOptions};

pub fn benchmark_state(n: usize) -> (PhysParams, SchemeState) {
    let p = PhysParams::default();
    let g = GridSpec::unit_square(n, n).expect("valid grid");
    let s = SchemeState::initial(g, &p, &InitialData::Benchmark).expect("benchmark data");
    (p, s)
}

pub fn two_level_state(n: usize, dt: f64) -> (PhysParams, SchemeState2) {
    let (p, s0) = benchmark_state(n);
    let s2 = bootstrap(&s0, &p, dt, &StepOptions::default()).expect("bootstrap step");
    (p, s2)
}
