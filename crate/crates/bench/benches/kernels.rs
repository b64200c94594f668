use criterion::{criterion_group, criterion_main, Criterion};
use discstat::simulate::step;
use discstat::stability::{assemble_linearization, rightmost_spectrum};
use discstat::stationary::{solve_discontinuous, DEFAULT_TOL};
use discstat_bench::{ey_construction, gray_scott_construction, predator_prey, square_state};
use std::hint::black_box;

fn laplacian(c: &mut Criterion) {
    let (grid, state) = square_state(128);
    let lap = grid.laplacian();
    let mut out = vec![0.0; grid.cell_count()];
    c.bench_function("laplacian_apply_128x128", |b| {
        b.iter(|| lap.apply(black_box(&state.v), &mut out))
    });
}

fn euler_step(c: &mut Criterion) {
    let (grid, state) = square_state(128);
    let lap = grid.laplacian();
    let (m, _) = predator_prey();
    c.bench_function("explicit_step_128x128", |b| {
        b.iter(|| step(&m, &lap, 0.01, black_box(&state), 1e-4))
    });
}

fn newton(c: &mut Criterion) {
    let line = gray_scott_construction(256);
    c.bench_function("newton_gray_scott_1d_256", |b| {
        b.iter(|| solve_discontinuous(black_box(&line), DEFAULT_TOL).unwrap())
    });
    let ey = ey_construction(64);
    c.bench_function("newton_ey_64x64", |b| {
        b.iter(|| solve_discontinuous(black_box(&ey), DEFAULT_TOL).unwrap())
    });
}

fn spectrum(c: &mut Criterion) {
    let con = gray_scott_construction(200);
    let field = solve_discontinuous(&con, DEFAULT_TOL).unwrap();
    let lin = assemble_linearization(con.branches.model(), &field).unwrap();
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    g.bench_function("dense_rightmost_gray_scott_200", |b| {
        b.iter(|| rightmost_spectrum(black_box(&lin), 5).unwrap())
    });
    g.finish();
}

criterion_group!(benches, laplacian, euler_step, newton, spectrum);
criterion_main!(benches);
