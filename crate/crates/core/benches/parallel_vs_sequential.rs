use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use diracsim_core::bag::{run_bag_cases, BagCase, BagFigureSpec};
use diracsim_core::klein::{evolve_klein_2p1_decomposed_with, figure_initial_state, KleinOptions, WavepacketSpec};
use diracsim_core::landau::*;
use diracsim_core::Execution;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn klein_slices(c: &mut Criterion) {
    let spec = WavepacketSpec { n_points: 512, n_slices: 32, ..Default::default() };
    let (kp, psi0) = figure_initial_state(&spec).unwrap();
    let mut group = c.benchmark_group("klein_slices");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| evolve_klein_2p1_decomposed_with(&psi0, &kp, 0.01, 1.0, &KleinOptions::default(), exec).unwrap())
        });
    }
    group.finish();
}

fn wigner_rows(c: &mut Criterion) {
    let p = JCParams::new(1.0, 4.0, 16).unwrap();
    let v = landau_fock_state(3, Branch::Negative, &p, LandauConvention::JaynesCummings).unwrap();
    let rho = SpinOscillatorState::pure(&v, p.n_max).unwrap();
    let grid = PhaseSpaceGrid::square(8.0, 128);
    let mut group = c.benchmark_group("wigner_rows");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                let w = wigner_from_density_with(&rho, &grid, exec);
                let s = pseudospin_field(&w, Threshold::Relative(1e-250));
                winding_number_with(&s, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn bag_cases(c: &mut Criterion) {
    let spec = BagFigureSpec { n_points: 8192, half_width: 60.0, dt: 0.0125, t_end: 1.0, ..Default::default() };
    let mut group = c.benchmark_group("bag_cases");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_bag_cases(&spec, &BagCase::ALL, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, klein_slices, wigner_rows, bag_cases);
criterion_main!(benches);
