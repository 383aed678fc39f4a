use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dnls_core::functionals::{grad_p, p_total};
use dnls_core::solver::iterate_once;
use dnls_core::{evolution, solve, IndexScheme, Potential, SolverConfig};

fn numex1(n: usize) -> SolverConfig {
    SolverConfig::new(1.0, 10.0, IndexScheme::OnSite, n)
}

fn energies(c: &mut Criterion) {
    let p = Potential::SaturableArctan;
    let mut group = c.benchmark_group("energies");
    for n in [25usize, 201, 2001] {
        let u = solve(&numex1(n), &p).unwrap().profile;
        group.bench_with_input(BenchmarkId::new("p_total", n), &u, |b, u| b.iter(|| p_total(black_box(u), &p, 1.0)));
        group.bench_with_input(BenchmarkId::new("grad_p", n), &u, |b, u| b.iter(|| grad_p(black_box(u), &p, 1.0)));
    }
    group.finish();
}

fn iteration(c: &mut Criterion) {
    let p = Potential::SaturableArctan;
    let mut group = c.benchmark_group("iterate_once");
    for n in [25usize, 201] {
        let cfg = numex1(n);
        let u = solve(&cfg, &p).unwrap().profile;
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| {
            b.iter(|| iterate_once(black_box(u), &cfg, &p).unwrap())
        });
    }
    group.finish();
}

fn full_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    group.bench_function("saturable_arctan_onsite_25", |b| {
        b.iter(|| solve(black_box(&numex1(25)), &Potential::SaturableArctan).unwrap())
    });
    let quartic = SolverConfig::new(0.5, 2.0, IndexScheme::InterSite, 96);
    group.bench_function("quartic_intersite_96", |b| {
        b.iter(|| solve(black_box(&quartic), &Potential::Quartic).unwrap())
    });
    group.finish();
}

fn evolve(c: &mut Criterion) {
    let p = Potential::SaturableArctan;
    let sol = solve(&numex1(25), &p).unwrap();
    let mut group = c.benchmark_group("evolution");
    group.sample_size(10);
    group.bench_function("rk4_t1_dt1e-3", |b| {
        b.iter(|| {
            let state = evolution::EvolutionState::from_profile(&sol.profile);
            evolution::integrate(&state, &p, 1.0, 1.0, 1e-3, &mut |_, _| {}).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, energies, iteration, full_solve, evolve);
criterion_main!(benches);
