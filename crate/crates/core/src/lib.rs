//! Adiabatic evolution of finite-dimensional, non-degenerate, time-dependent
//! quantum systems.
//!
//! The crate computes basis-dependent adiabatic phases along an instantaneous
//! eigenbasis, the gauge-invariant interference terms they feed into, and
//! exact dynamics to compare against. The spin-1/2 in a precessing field is
//! built in with closed forms for its eigenframe, phases and exact evolution.
//!
//! Units: hbar = 1. Energies are angular frequencies and phases are radians.

pub mod adiabatic;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod models;
pub mod observables;

pub use adiabatic::{
    adiabatic_state, adiabatic_state_traced, average_energy, berry_phase_per_level, build_trajectory,
    build_trajectory_with, relative_gauge, transform_superposition, AdiabaticTrajectory, GaugeMode,
    QuadratureReport, Superposition, TimeGrid, TrajectoryOptions,
};
pub use error::{Error, Result};
pub use exact::{
    evolve_exact, evolve_exact_with, spin_half_exact, spin_half_rabi_frequency, PropagationResult,
    PropagatorOptions,
};
pub use linalg::{
    align_phase, eigh, eigh_with, expectation, inner, phase_factor, EigenFrame, EighOptions, HermitianOperator,
    StateVector, C64,
};
pub use models::{
    apply_gauge, spin_half_eigenframe, spin_half_eigenframe_derivative, spin_half_hamiltonian, GaugeTransform,
    HamiltonianPath, PhaseProfile, SampledHamiltonian, SpinHalfParams, SpinHalfPath,
};
pub use observables::{
    decompose_density, decompose_expectation, gauge_invariance_residual, gauge_invariance_residual_with,
    pair_terms, spin_z_closed_form, DensityDecomposition, InterferenceDecomposition, PairTerms, Probe,
};
