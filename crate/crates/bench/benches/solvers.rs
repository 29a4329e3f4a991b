use criterion::{black_box, criterion_group, criterion_main, Criterion};
use phototherm::oracle::{build_operator, full_spectrum};
use phototherm::{solve_basic_state, StabilitySolver};
use phototherm_bench::{basic, near_neutral, overstable};

fn basic_state(c: &mut Criterion) {
    let p = overstable();
    c.bench_function("basic_state_2000", |b| b.iter(|| solve_basic_state(black_box(&p), 2000).unwrap()));
}

fn determinant(c: &mut Criterion) {
    let p = overstable();
    let b = basic(&p);
    let s = StabilitySolver::new(&p, &b).unwrap();
    let mp = near_neutral();
    c.bench_function("determinant", |bench| bench.iter(|| s.determinant(black_box(&mp)).unwrap()));
}

fn stationary_root(c: &mut Criterion) {
    let p = overstable();
    let b = basic(&p);
    let s = StabilitySolver::new(&p, &b).unwrap();
    c.bench_function("stationary_root_cold", |bench| bench.iter(|| s.solve_stationary_ra(black_box(2.0), None).unwrap()));
}

fn oscillatory_root(c: &mut Criterion) {
    let p = overstable();
    let b = basic(&p);
    let s = StabilitySolver::new(&p, &b).unwrap();
    c.bench_function("oscillatory_newton", |bench| bench.iter(|| s.solve_oscillatory(black_box(2.3), 86.0, 2.0).unwrap()));
}

fn collocation(c: &mut Criterion) {
    let p = overstable();
    let b = basic(&p);
    let mut g = c.benchmark_group("collocation_spectrum");
    g.sample_size(10);
    for n in [32, 64] {
        g.bench_function(format!("n{n}"), |bench| {
            bench.iter(|| full_spectrum(&build_operator(2.3, 86.0, &p, &b, black_box(n)).unwrap()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, basic_state, determinant, stationary_root, oscillatory_root, collocation);
criterion_main!(benches);
