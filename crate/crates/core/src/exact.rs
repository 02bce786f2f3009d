//! Exact Schrödinger evolution (hbar = 1).
//!
//! Two independent routes: a fixed-step classical RK4 integrator for any
//! [`HamiltonianPath`], and the closed-form rotating-frame solution of the
//! spin-1/2 precessing-field model.

use crate::adiabatic::TimeGrid;
use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64, I};
use crate::models::{HamiltonianPath, SpinHalfParams};

/// Accepted bound on `max_k | ||psi_k||^2 - 1 |`.
pub const MAX_NORM_DRIFT: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
pub struct PropagatorOptions {
    /// RK4 steps per grid interval.
    pub substeps: usize,
    pub max_norm_drift: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self { substeps: 2, max_norm_drift: MAX_NORM_DRIFT }
    }
}

#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub grid: TimeGrid,
    pub states: Vec<StateVector>,
    pub norm_drift: f64,
}

pub fn evolve_exact(path: &dyn HamiltonianPath, psi0: &StateVector, grid: TimeGrid) -> Result<PropagationResult> {
    evolve_exact_with(path, psi0, grid, PropagatorOptions::default())
}

/// Integrates `i d/dt psi = H(t) psi` with classical RK4, recording the state
/// at every grid node.
pub fn evolve_exact_with(
    path: &dyn HamiltonianPath,
    psi0: &StateVector,
    grid: TimeGrid,
    opts: PropagatorOptions,
) -> Result<PropagationResult> {
    if psi0.dim() != path.dim() {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: psi0.dim() });
    }
    if !psi0.is_normalized() {
        return Err(Error::NormalizationError { norm_sqr: psi0.norm_sqr() });
    }
    if opts.substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be positive".into()));
    }
    let h = grid.dt() / opts.substeps as f64;
    let minus_i = -I;
    let rhs = |t: f64, psi: &StateVector| -> Result<StateVector> {
        Ok(path.hamiltonian(t)?.apply_unchecked(psi).scale(minus_i))
    };

    let mut states = Vec::with_capacity(grid.len());
    let mut psi = psi0.clone();
    let mut drift: f64 = 0.0;
    states.push(psi.clone());
    for k in 0..grid.steps() {
        let start = grid.node(k);
        for s in 0..opts.substeps {
            let t = start + s as f64 * h;
            let k1 = rhs(t, &psi)?;
            let k2 = rhs(t + 0.5 * h, &psi.add_scaled(C64::new(0.5 * h, 0.0), &k1))?;
            let k3 = rhs(t + 0.5 * h, &psi.add_scaled(C64::new(0.5 * h, 0.0), &k2))?;
            let k4 = rhs(t + h, &psi.add_scaled(C64::new(h, 0.0), &k3))?;
            let update = k1
                .add_scaled(C64::new(2.0, 0.0), &k2)
                .add_scaled(C64::new(2.0, 0.0), &k3)
                .add_scaled(C64::new(1.0, 0.0), &k4);
            psi = psi.add_scaled(C64::new(h / 6.0, 0.0), &update);
        }
        drift = drift.max((psi.norm_sqr() - 1.0).abs());
        states.push(psi.clone());
    }
    if drift > opts.max_norm_drift {
        return Err(Error::NormDriftExceeded { drift, limit: opts.max_norm_drift });
    }
    Ok(PropagationResult { grid, states, norm_drift: drift })
}

/// `exp(-i (a . sigma) t)` applied to a two-component state, via
/// `cos(|a| t) 1 - i sin(|a| t) (a/|a|) . sigma`.
fn pauli_exp(a: [f64; 3], t: f64, psi: [C64; 2]) -> [C64; 2] {
    let mag = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if mag == 0.0 {
        return psi;
    }
    let (s, c) = (mag * t).sin_cos();
    let (nx, ny, nz) = (a[0] / mag, a[1] / mag, a[2] / mag);
    // n . sigma = [[nz, nx - i ny], [nx + i ny, -nz]]
    let m00 = C64::new(c, -s * nz);
    let m01 = -I * s * C64::new(nx, -ny);
    let m10 = -I * s * C64::new(nx, ny);
    let m11 = C64::new(c, s * nz);
    [m00 * psi[0] + m01 * psi[1], m10 * psi[0] + m11 * psi[1]]
}

/// Closed-form exact state of the precessing-field spin-1/2 at time `t`:
/// `R_z(omega0 t) exp(-i H_eff t) psi0`, with `R_z(phi) = exp(-i phi sigma_z / 2)` and
/// the static rotating-frame Hamiltonian
/// `H_eff = (mu_B / 2)(sin(theta) sigma_x + cos(theta) sigma_z) - (omega0 / 2) sigma_z`.
pub fn spin_half_exact(p: &SpinHalfParams, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if psi0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: psi0.dim() });
    }
    if !psi0.is_normalized() {
        return Err(Error::NormalizationError { norm_sqr: psi0.norm_sqr() });
    }
    let half = 0.5 * p.mu_b();
    let (st, ct) = p.theta().sin_cos();
    let field = [half * st, 0.0, half * ct - 0.5 * p.omega0()];
    let rotating = pauli_exp(field, t, [psi0.amp(0), psi0.amp(1)]);
    let lab = pauli_exp([0.0, 0.0, 0.5 * p.omega0()], t, rotating);
    StateVector::new(lab.to_vec())
}

/// Level splitting of the rotating-frame Hamiltonian,
/// `sqrt(mu_B^2 - 2 mu_B omega0 cos(theta) + omega0^2)`: the exact oscillation
/// frequency of spin observables.
pub fn spin_half_rabi_frequency(p: &SpinHalfParams) -> f64 {
    let (mb, w) = (p.mu_b(), p.omega0());
    (mb * mb - 2.0 * mb * w * p.theta().cos() + w * w).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expectation, HermitianOperator};
    use crate::models::{spin_half_hamiltonian, SampledHamiltonian, SpinHalfPath};
    use std::f64::consts::PI;

    fn constant_path(h: HermitianOperator) -> SampledHamiltonian {
        SampledHamiltonian::new((0..5).map(|k| (k as f64 * 10.0, h.clone())).collect()).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_stationary() {
        let path = constant_path(HermitianOperator::zeros(2));
        let psi0 = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let res = evolve_exact(&path, &psi0, TimeGrid::new(0.0, 40.0, 64).unwrap()).unwrap();
        assert!(res.states.iter().all(|s| s == &psi0));
        assert_eq!(res.norm_drift, 0.0);
    }

    #[test]
    fn spin_up_along_z_field_only_acquires_phase() {
        let mu_b = 3.0;
        let path = constant_path(HermitianOperator::pauli_z().scale(0.5 * mu_b));
        let up = StateVector::basis(2, 0);
        let grid = TimeGrid::new(0.0, 40.0, 4000).unwrap();
        let res = evolve_exact(&path, &up, grid).unwrap();
        for (k, s) in res.states.iter().enumerate() {
            let t = grid.node(k);
            let expected = up.scale(C64::from_polar(1.0, -0.5 * mu_b * t));
            assert!(s.distance(&expected) < 1e-8);
            assert!((expectation(s, &HermitianOperator::spin_z()).unwrap() - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn coarse_grid_trips_norm_drift() {
        let path = SpinHalfPath(SpinHalfParams::new(10.0, 1.0, 0.1).unwrap());
        let psi0 = StateVector::basis(2, 0);
        let err = evolve_exact(&path, &psi0, TimeGrid::new(0.0, 60.0, 64).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NormDriftExceeded { .. }));
    }

    #[test]
    fn rejects_unnormalized_or_mismatched_state() {
        let path = SpinHalfPath(SpinHalfParams::new(10.0, 1.0, 0.1).unwrap());
        let grid = TimeGrid::new(0.0, 1.0, 8).unwrap();
        assert!(evolve_exact(&path, &StateVector::from_real(&[1.0, 1.0]).unwrap(), grid).is_err());
        assert!(evolve_exact(&path, &StateVector::basis(3, 0), grid).is_err());
        let p = SpinHalfParams::new(10.0, 1.0, 0.1).unwrap();
        assert!(spin_half_exact(&p, &StateVector::basis(3, 0), 1.0).is_err());
    }

    #[test]
    fn closed_form_at_time_zero_is_identity() {
        let p = SpinHalfParams::new(10.0, 1.0, 0.1).unwrap();
        let psi0 = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        assert!(spin_half_exact(&p, &psi0, 0.0).unwrap().distance(&psi0) < 1e-16);
    }

    #[test]
    fn static_field_reduces_to_eigen_exponential() {
        let p = SpinHalfParams::new(4.0, 0.9, 0.0).unwrap();
        let psi0 = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let frame = crate::linalg::eigh(&spin_half_hamiltonian(&p, 0.0)).unwrap();
        for &t in &[0.3, 2.0, 11.0] {
            let mut expected = StateVector::zeros(2);
            for j in 0..2 {
                let c = crate::linalg::inner(frame.vector(j), &psi0).unwrap();
                expected = expected.add_scaled(c * C64::from_polar(1.0, -frame.energy(j) * t), frame.vector(j));
            }
            assert!(spin_half_exact(&p, &psi0, t).unwrap().distance(&expected) < 1e-13);
        }
    }

    #[test]
    fn closed_form_satisfies_schrodinger_equation() {
        let p = SpinHalfParams::new(10.0, PI / 3.0, 0.7).unwrap();
        let psi0 = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let h = 1e-5;
        for &t in &[0.5, 3.0, 9.1] {
            let psi = spin_half_exact(&p, &psi0, t).unwrap();
            let plus = spin_half_exact(&p, &psi0, t + h).unwrap();
            let minus = spin_half_exact(&p, &psi0, t - h).unwrap();
            let lhs = plus.add_scaled(C64::new(-1.0, 0.0), &minus).scale(I / (2.0 * h));
            let rhs = spin_half_hamiltonian(&p, t).apply(&psi).unwrap();
            assert!(lhs.distance(&rhs) < 1e-7);
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-14);
        }
    }
}
