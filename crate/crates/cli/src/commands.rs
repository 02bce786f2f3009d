use std::f64::consts::PI;
use std::path::Path;

use adiaphase::{
    adiabatic_state, adiabatic_state_traced, berry_phase_per_level, build_trajectory, evolve_exact_with, expectation,
    gauge_invariance_residual_with, phase_factor, spin_half_exact, spin_z_closed_form, transform_superposition,
    AdiabaticTrajectory, GaugeMode, GaugeTransform, HamiltonianPath, HermitianOperator, PhaseProfile, Probe,
    PropagatorOptions, SpinHalfParams, SpinHalfPath, StateVector, Superposition, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Model, Scenario};
use crate::error::{CliError, CliResult};
use crate::output::{emit, float, Csv};

/// Bound on the largest gauge-invariance residual accepted by `gauge-test`.
pub const GAUGE_TOLERANCE: f64 = 1e-8;
pub const MAX_EPSILON: f64 = 0.2;

fn reference_mode(model: &Model) -> GaugeMode {
    match model {
        Model::SpinHalf(_) => GaugeMode::ClosedForm,
        Model::Sampled(_) => GaugeMode::NumericAligned,
    }
}

/// `exp(-i phi sigma_z / 2)`.
fn rotate_z(psi: &StateVector, phi: f64) -> CliResult<StateVector> {
    Ok(StateVector::new(vec![psi.amp(0) * phase_factor(-0.5 * phi), psi.amp(1) * phase_factor(0.5 * phi)])?)
}

/// Exact spin-1/2 state at `t` for evolution starting from `psi0` at `t0`.
/// The field at `t0` is the `t0 = 0` field rotated about z by `omega0 t0`.
fn spin_half_exact_from(p: &SpinHalfParams, psi0: &StateVector, t0: f64, t: f64) -> CliResult<StateVector> {
    let phi = p.omega0() * t0;
    let start = rotate_z(psi0, -phi)?;
    rotate_z(&spin_half_exact(p, &start, t - t0)?, phi)
}

/// RK4 substeps per grid interval keeping the accumulated norm drift near
/// 1e-9: the per-step drift of RK4 on `-iH` is about `(h |E|)^6 / 72`.
fn rk4_substeps(path: &dyn HamiltonianPath, grid: &TimeGrid) -> CliResult<usize> {
    let mut scale: f64 = 0.0;
    for t in grid.nodes() {
        scale = scale.max(path.hamiltonian(t)?.frobenius_norm());
    }
    let budget = 72.0 * 1e-9 / (grid.span() * scale).max(f64::MIN_POSITIVE);
    let x = budget.powf(0.2).min(0.5);
    Ok(((grid.dt() * scale / x).ceil() as usize).max(2))
}

fn exact_states(scenario: &Scenario, psi0: &StateVector) -> CliResult<Vec<StateVector>> {
    let grid = scenario.grid;
    match &scenario.model {
        Model::SpinHalf(SpinHalfPath(p)) => {
            grid.nodes().map(|t| spin_half_exact_from(p, psi0, grid.t0(), t)).collect()
        }
        Model::Sampled(s) => {
            let opts = PropagatorOptions { substeps: rk4_substeps(s, &grid)?, ..Default::default() };
            Ok(evolve_exact_with(s, psi0, grid, opts)?.states)
        }
    }
}

/// Real amplitudes `(a1, a2)` when the spin-1/2 closed form applies.
fn closed_form_amplitudes(scenario: &Scenario) -> Option<(SpinHalfParams, f64, f64)> {
    let p = scenario.model.spin_half()?;
    let a = scenario.superposition.coeffs();
    let real = a.iter().all(|c| c.im == 0.0);
    let sz = matches!(scenario.observable, crate::config::Observable::SpinZ);
    (real && sz && scenario.grid.t0() == 0.0).then(|| (*p, a[0].re, a.get(1).map_or(0.0, |c| c.re)))
}

fn trajectory(scenario: &Scenario) -> CliResult<(AdiabaticTrajectory, Superposition)> {
    let path = scenario.model.path();
    match &scenario.gauge {
        Some(g) => {
            let traj = build_trajectory(path, scenario.grid, GaugeMode::Twisted(g.clone()))?;
            let s = transform_superposition(&scenario.superposition, g, scenario.grid.t0())?;
            Ok((traj, s))
        }
        None => Ok((build_trajectory(path, scenario.grid, reference_mode(&scenario.model))?, scenario.superposition.clone())),
    }
}

pub fn simulate(scenario: &Scenario, output: Option<&Path>) -> CliResult<()> {
    let (traj, s) = trajectory(scenario)?;
    let observable = scenario.observable.operator();
    let psi0 = adiabatic_state(&traj, &s, 0)?;
    let exact = exact_states(scenario, &psi0)?;
    let closed = closed_form_amplitudes(scenario);

    let m = traj.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|j| format!("gamma_{j}")));
    header.extend((1..=m).map(|j| format!("avgE_{j}")));
    header.extend(["obs_adiabatic", "obs_exact"].map(String::from));
    if closed.is_some() {
        header.push("obs_closed_form".into());
    }
    header.push("abs_error".into());

    let mut csv = Csv::new(&header);
    for (k, t) in scenario.grid.nodes().enumerate() {
        let adiabatic = expectation(&adiabatic_state_traced(&traj, &s, k, scenario.alpha_tracer)?, &observable)?;
        let exact = expectation(&exact[k], &observable)?;
        let mut row = vec![float(t)];
        row.extend((0..m).map(|j| float(traj.gamma(j, k))));
        row.extend((0..m).map(|j| float(traj.avg_energy(j, k))));
        row.extend([float(adiabatic), float(exact)]);
        if let Some((p, a1, a2)) = closed {
            row.push(float(spin_z_closed_form(&p, a1, a2, scenario.alpha_tracer, t)?));
        }
        row.push(float((adiabatic - exact).abs()));
        csv.row(&row);
    }
    emit(output, &csv)
}

fn random_gauge(rng: &mut ChaCha8Rng, dim: usize, frequency: f64) -> GaugeTransform {
    let profiles = (0..dim)
        .map(|_| PhaseProfile::smooth(std::array::from_fn(|_| rng.random_range(-2.0..=2.0)), frequency))
        .collect();
    GaugeTransform::new(profiles).expect("finite coefficients")
}

fn describe_gauge(g: &GaugeTransform) -> String {
    g.phases()
        .iter()
        .enumerate()
        .map(|(j, p)| {
            format!(
                "alpha_{}(t) = {} + {} t + {} sin({} t + {})",
                j + 1,
                float(p.offset),
                float(p.rate),
                float(p.amplitude),
                float(p.frequency),
                float(p.shift)
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn max_residual(
    reference: &AdiabaticTrajectory,
    twisted: &AdiabaticTrajectory,
    s: &Superposition,
    observable: &HermitianOperator,
    include_adiabatic_phase: bool,
) -> CliResult<f64> {
    let probes: Vec<Probe> =
        std::iter::once(Probe::Observable(observable)).chain((0..reference.dim()).map(Probe::Component)).collect();
    let mut worst: f64 = 0.0;
    for k in 0..reference.grid().len() {
        for &probe in &probes {
            worst = worst.max(gauge_invariance_residual_with(reference, twisted, s, probe, k, include_adiabatic_phase)?);
        }
    }
    Ok(worst)
}

/// Returns whether every gauge passed.
pub fn gauge_test(
    scenario: &Scenario,
    seed: u64,
    count: usize,
    drop_adiabatic_phase: bool,
    output: Option<&Path>,
) -> CliResult<bool> {
    let dim = scenario.model.dim();
    if dim < 2 || scenario.superposition.len() < 2 {
        return Err(CliError::Scenario("gauge-test needs at least two populated levels".into()));
    }
    let path = scenario.model.path();
    let reference = build_trajectory(path, scenario.grid, reference_mode(&scenario.model))?;
    let observable = scenario.observable.operator();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauges: Vec<GaugeTransform> = scenario.gauge.iter().cloned().collect();
    gauges.extend((0..count).map(|_| random_gauge(&mut rng, dim, scenario.gauge_frequency)));

    let mut csv = Csv::new(&["gauge".into(), "max_residual".into()]);
    let mut passed = true;
    for (i, g) in gauges.iter().enumerate() {
        let twisted = build_trajectory(path, scenario.grid, GaugeMode::Twisted(g.clone()))?;
        let residual = max_residual(&reference, &twisted, &scenario.superposition, &observable, !drop_adiabatic_phase)?;
        let ok = residual <= GAUGE_TOLERANCE;
        println!("gauge {i}: max residual {residual:.3e} {}", if ok { "ok" } else { "FAIL" });
        if !ok {
            println!("  parameters: {}", describe_gauge(g));
            passed = false;
        }
        csv.row(&[i.to_string(), float(residual)]);
    }
    if let Some(p) = output {
        crate::output::write_atomic(p, csv.text())?;
    }
    println!("{} gauges, {}", gauges.len(), if passed { "all within 1e-8" } else { "violations found" });
    Ok(passed)
}

pub fn berry(scenario: &Scenario) -> CliResult<()> {
    let p = scenario
        .model
        .spin_half()
        .ok_or_else(|| CliError::Scenario("berry needs model = spin_half".into()))?;
    let period = p.period().ok_or_else(|| CliError::Scenario("berry needs omega0 != 0".into()))?;
    let (traj, _) = trajectory(scenario)?;
    let phases = berry_phase_per_level(&traj, period)?;
    for (j, g) in phases.iter().enumerate() {
        println!("gamma_{}(T) = {}", j + 1, float(*g));
    }
    println!("gamma_2(T) - gamma_1(T) = {}", float(phases[1] - phases[0]));
    println!("2 pi cos(theta) = {}", float(2.0 * PI * p.theta().cos()));
    Ok(())
}

fn sweep_row(scenario: &Scenario, base: &SpinHalfParams, epsilon: f64) -> CliResult<(f64, f64)> {
    let p = SpinHalfParams::with_adiabaticity(base.mu_b(), base.theta(), epsilon)?;
    let period = p.period().expect("epsilon is positive");
    let grid = TimeGrid::new(0.0, period, scenario.grid.steps())?;
    let traj = build_trajectory(&SpinHalfPath(p), grid, GaugeMode::ClosedForm)?;
    let observable = scenario.observable.operator();
    let s = &scenario.superposition;
    let psi0 = adiabatic_state(&traj, s, 0)?;
    let mut worst: f64 = 0.0;
    for (k, t) in grid.nodes().enumerate() {
        let adiabatic = expectation(&adiabatic_state_traced(&traj, s, k, scenario.alpha_tracer)?, &observable)?;
        let exact = expectation(&spin_half_exact(&p, &psi0, t)?, &observable)?;
        worst = worst.max((adiabatic - exact).abs());
    }
    Ok((p.omega0(), worst))
}

/// Rows are ordered by decreasing epsilon; returns whether the error
/// decreases monotonically along them.
pub fn sweep(scenario: &Scenario, epsilons: &[f64], output: Option<&Path>) -> CliResult<bool> {
    let base = *scenario
        .model
        .spin_half()
        .ok_or_else(|| CliError::Scenario("sweep needs model = spin_half".into()))?;
    if epsilons.is_empty() {
        return Err(CliError::Scenario("sweep needs at least one epsilon".into()));
    }
    if let Some(bad) = epsilons.iter().find(|&&e| !(e > 0.0 && e <= MAX_EPSILON)) {
        return Err(CliError::Scenario(format!("epsilon {bad} outside (0, {MAX_EPSILON}]")));
    }
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();

    let rows: Vec<CliResult<(f64, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sorted.iter().map(|&e| scope.spawn(move || sweep_row(scenario, &base, e))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut csv = Csv::new(&["epsilon", "omega0", "max_abs_error", "decreasing"].map(String::from));
    let mut previous = f64::INFINITY;
    let mut monotone = true;
    for (&epsilon, row) in sorted.iter().zip(rows) {
        let (omega0, error) = row?;
        let decreasing = error < previous;
        monotone &= decreasing;
        previous = error;
        csv.row(&[float(epsilon), float(omega0), float(error), decreasing.to_string()]);
    }
    emit(output, &csv)?;
    eprintln!("monotone decrease: {monotone}");
    Ok(monotone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use adiaphase::{spin_half_hamiltonian, C64};

    #[test]
    fn shifted_exact_solution_solves_the_equation() {
        let p = SpinHalfParams::new(10.0, 1.0, 0.7).unwrap();
        let psi0 = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let t0 = 2.3;
        assert!(spin_half_exact_from(&p, &psi0, t0, t0).unwrap().distance(&psi0) < 1e-15);
        let h = 1e-5;
        let t = 4.0;
        let plus = spin_half_exact_from(&p, &psi0, t0, t + h).unwrap();
        let minus = spin_half_exact_from(&p, &psi0, t0, t - h).unwrap();
        let lhs = plus.add_scaled(C64::new(-1.0, 0.0), &minus).scale(C64::new(0.0, 1.0 / (2.0 * h)));
        let psi = spin_half_exact_from(&p, &psi0, t0, t).unwrap();
        let rhs = spin_half_hamiltonian(&p, t).apply(&psi).unwrap();
        assert!(lhs.distance(&rhs) < 1e-7);
    }
}
