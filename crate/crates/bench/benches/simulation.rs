use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use xeit_bench::{desk_params, hyperfine_6gamma, spectrum_params};
use xeit_core::propagation::PolaritonSolver;
use xeit_core::*;

fn bench_bessel(c: &mut Criterion) {
    c.bench_function("bessel_j1_series_branch", |b| {
        b.iter(|| bessel_j1(black_box(3.7)))
    });
    c.bench_function("bessel_j1_recurrence_branch", |b| {
        b.iter(|| bessel_j1(black_box(37.0)))
    });
}

fn bench_spectrum(c: &mut Criterion) {
    let params = spectrum_params();
    let field = hyperfine_6gamma();
    c.bench_function("coherence_sum", |b| {
        b.iter(|| coherence_sum(black_box(1.3), &params, &field).unwrap())
    });
    c.bench_function("spectrum_scan_6001", |b| {
        b.iter(|| scan((-30.0, 30.0), 6001, &params, &field).unwrap())
    });
}

fn bench_polariton_step(c: &mut Criterion) {
    let params = desk_params();
    let schedule = FieldSchedule::constant(6.4, Orientation::Parallel, 0.0, 1e6).unwrap();
    let pulse = PulseShape::gaussian(0.0, 1.0).unwrap();
    let grid = Grid1D::new(0.0, 1.45, 4096, 5e-4).unwrap();
    let solver = PolaritonSolver::new(grid, &schedule, &params, &pulse, false).unwrap();
    let mut state = solver.initial_state(0.0).unwrap();
    for i in 0..grid.n_points {
        let z = grid.z(i);
        state.psi[i] = Complex64::new((-((z - 0.4) / 0.07) * ((z - 0.4) / 0.07)).exp(), 0.0);
    }
    c.bench_function("polariton_step_4096", |b| {
        b.iter(|| {
            let mut s = state.clone();
            solver.step(&mut s, black_box(5e-4)).unwrap()
        })
    });
}

fn bench_storage_run(c: &mut Criterion) {
    let config = config::ExperimentConfig::from_json(
        r#"{
        "mode": "store",
        "cavity": {"kappa": 1000.0, "kappa_r": 500.0, "g": 1.0, "n_nuclei": 100.0},
        "schedule": {"segments": [
            {"t_start": -0.75, "t_end": 1.3, "b_start": 6.4, "b_end": 6.4},
            {"t_start": 1.3, "t_end": 2.2, "b_start": 0.0, "b_end": 0.0},
            {"t_start": 2.2, "t_end": 3.9, "b_start": 6.4, "b_end": 6.4}
        ]},
        "pulse": {"type": "gaussian", "amplitude": 1.0, "t0": 0.2},
        "grid": {"z_max": 1.45, "n_points": 512, "dt": 2.0e-3},
        "time": {"t_start": -0.75, "t_end": 3.9},
        "probe_z": 0.8
    }"#,
    )
    .unwrap();
    let mut group = c.benchmark_group("storage");
    group.sample_size(10);
    group.bench_function("storage_roundtrip_512", |b| b.iter(|| run(&config).unwrap()));
    group.finish();
}

criterion_group!(
    benches,
    bench_bessel,
    bench_spectrum,
    bench_polariton_step,
    bench_storage_run
);
criterion_main!(benches);
