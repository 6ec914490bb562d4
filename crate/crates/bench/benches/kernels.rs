use std::f64::consts::PI;
use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracwave_core::bessel::bessel_k;
use fracwave_core::discretization::{fully_discrete_solve, InitRule, TimeGrid};
use fracwave_core::extension::psi_integral;
use fracwave_core::mlfunc::ml_value;
use fracwave_core::spectral::{make_domain, DomainKind, ModeExpansion};
use fracwave_core::wavesolve::{Forcing, FracWaveProblem, TimeProfile};

fn mittag_leffler(c: &mut Criterion) {
    let mut g = c.benchmark_group("ml");
    for z in [-0.5, -20.0, -500.0, -1e5] {
        g.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| b.iter(|| ml_value(1.5, 1.0, black_box(z)).unwrap()));
    }
    g.finish();
}

fn bessel(c: &mut Criterion) {
    let mut g = c.benchmark_group("bessel_k");
    for z in [0.5, 2.5, 40.0] {
        g.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| b.iter(|| bessel_k(0.3, black_box(z)).unwrap()));
    }
    g.finish();
}

fn profile_integral(c: &mut Criterion) {
    let mut g = c.benchmark_group("psi_integral");
    for ell in [1usize, 4, 8] {
        g.bench_with_input(BenchmarkId::from_parameter(ell), &ell, |b, &ell| {
            b.iter(|| psi_integral(0.3, ell, 0.0, black_box(0.5), 1.0).unwrap())
        });
    }
    g.finish();
}

fn discrete_solve(c: &mut Criterion) {
    let dom = Arc::new(make_domain(DomainKind::Interval { length: PI }, 16).unwrap());
    let g0 = ModeExpansion::unit(dom.clone(), 1);
    let f = Forcing::zero(16).with_mode(2, TimeProfile::sine(1.0, 2.0, 0.0));
    let prob = FracWaveProblem::new(dom.clone(), 0.5, 1.5, 1.0, g0, ModeExpansion::zeros(dom), f).unwrap();
    let mut g = c.benchmark_group("fully_discrete_solve");
    g.sample_size(20);
    for steps in [256usize, 1024] {
        let grid = TimeGrid::uniform(1.0, steps).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(steps), &grid, |b, grid| {
            b.iter(|| fully_discrete_solve(&prob, grid, &InitRule::FractionalTaylor).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, mittag_leffler, bessel, profile_integral, discrete_solve);
criterion_main!(benches);
