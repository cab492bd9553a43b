//! Parallel vs sequential execution of the two data-parallel workloads:
//! lattice evaluation of expansion terms and reduced-flow parameter sweeps.
//! Build with `--no-default-features` to see the sequential fallback inside
//! library calls such as `collocate`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ddephase::bifurcation::{sweep, Axis, SweepConfig, SweepMode};
use ddephase::dde::Attractor;
use ddephase::exec::{map_indexed, map_indexed_seq};
use ddephase::fourier::{collocate_real_fn, Lattice};
use ddephase::homological::ReduceOptions;
use ddephase::stuart_landau::{integrate_reduced, reduce_sl, SLParams};

fn lattice_evaluation(c: &mut Criterion) {
    let p = SLParams { rho: 0.7, tau: 0.5, ..SLParams::default() };
    let ex = reduce_sl(&p, 2, &ReduceOptions::default()).unwrap();
    let hist = ex.e_hist(1).clone();
    let mut group = c.benchmark_group("lattice_eval");
    for n in [32usize, 64] {
        let lat = Lattice::new(2, n);
        let eval = |i: usize| {
            let phi = lat.point(i);
            hist.eval_unchecked(&phi, -0.25)[0].re
        };
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| black_box(map_indexed(lat.len(), eval)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| black_box(map_indexed_seq(lat.len(), eval)))
        });
    }
    let lat = Lattice::new(2, 33);
    let f = ex.f(2).clone();
    group.bench_function("collocate_33", |b| {
        b.iter(|| black_box(collocate_real_fn(&lat, 8, |phi| f.eval_real(phi)).unwrap()))
    });
    group.finish();
}

fn reduced_sweep(c: &mut Criterion) {
    let base = SLParams { eps: 0.1, ..SLParams::default() };
    let taus: Vec<f64> = (0..8).map(|i| i as f64 * 0.25).collect();
    let rhos: Vec<f64> = (0..16).map(|i| i as f64 * std::f64::consts::TAU / 16.0).collect();
    let cell = |i: usize| {
        let p = SLParams { rho: rhos[i % 16], tau: taus[i / 16], ..base };
        let tr = integrate_reduced(&p, 2, 0.3, 200.0, 0.01).unwrap();
        Attractor::from_psi(*tr.psi.last().unwrap())
    };
    let mut group = c.benchmark_group("reduced_sweep_128_cells");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| black_box(map_indexed(128, cell))));
    group.bench_function("sequential", |b| b.iter(|| black_box(map_indexed_seq(128, cell))));
    let mut cfg = SweepConfig::new(base, 16, 8, SweepMode::Reduced);
    cfg.tau = Axis { lo: 0.0, hi: 1.75, n: 8, endpoint: true };
    cfg.t_end = 200.0;
    group.bench_function("library_sweep", |b| b.iter(|| black_box(sweep(&cfg).unwrap())));
    group.finish();
}

criterion_group!(benches, lattice_evaluation, reduced_sweep);
criterion_main!(benches);
