use std::f64::consts::PI;

use adiaphase::{
    build_trajectory, eigh, evolve_exact, spin_half_exact, GaugeMode, GaugeTransform, HermitianOperator, PhaseProfile,
    SpinHalfParams, SpinHalfPath, StateVector, TimeGrid, C64,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn random_hermitian(n: usize) -> HermitianOperator {
    // Deterministic fill; no RNG needed for a benchmark input.
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in r..n {
            let x = ((r * 31 + c * 17) as f64).sin();
            let y = if r == c { 0.0 } else { ((r * 7 + c * 13) as f64).cos() };
            entries[r * n + c] = C64::new(x, y);
            entries[c * n + r] = C64::new(x, -y);
        }
    }
    HermitianOperator::new(n, entries).unwrap()
}

fn bench_eigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for n in [2, 4, 8, 16] {
        let h = random_hermitian(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| eigh(h).unwrap()));
    }
    group.finish();
}

fn bench_trajectory(c: &mut Criterion) {
    let p = SpinHalfParams::new(10.0, PI / 3.0, 0.1).unwrap();
    let path = SpinHalfPath(p);
    let grid = TimeGrid::new(0.0, p.period().unwrap(), 2048).unwrap();
    let gauge = GaugeTransform::new(vec![
        PhaseProfile { offset: 0.3, rate: -0.4, amplitude: 1.8, frequency: 0.1, shift: 1.0 },
        PhaseProfile::linear(1.0, 0.7),
    ])
    .unwrap();

    c.bench_function("trajectory/closed_form", |b| {
        b.iter(|| build_trajectory(&path, grid, GaugeMode::ClosedForm).unwrap())
    });
    c.bench_function("trajectory/twisted", |b| {
        b.iter(|| build_trajectory(&path, grid, GaugeMode::Twisted(gauge.clone())).unwrap())
    });
    c.bench_function("trajectory/numeric_aligned", |b| {
        b.iter(|| build_trajectory(&path, grid, GaugeMode::NumericAligned).unwrap())
    });
}

fn bench_exact(c: &mut Criterion) {
    let p = SpinHalfParams::new(10.0, PI / 3.0, 1.0).unwrap();
    let path = SpinHalfPath(p);
    let grid = TimeGrid::new(0.0, p.period().unwrap(), 4096).unwrap();
    let psi0 = StateVector::from_real(&[0.6, 0.8]).unwrap();
    c.bench_function("exact/rk4_4096", |b| b.iter(|| evolve_exact(&path, &psi0, grid).unwrap()));
    c.bench_function("exact/closed_form_4096", |b| {
        b.iter(|| grid.nodes().map(|t| spin_half_exact(&p, &psi0, t).unwrap()).collect::<Vec<_>>())
    });
}

criterion_group!(benches, bench_eigh, bench_trajectory, bench_exact);
criterion_main!(benches);
