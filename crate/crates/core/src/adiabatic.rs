//! Adiabatic trajectories: per-level adiabatic phases and average energies on
//! a uniform time grid, and the leading-order adiabatic state built from them.
//!
//! Phases are accumulated unwrapped. Times inside a trajectory are measured
//! from the grid origin `t0`, which plays the role of the initial instant.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{align_phase, eigh_with, inner_unchecked, phase_factor, EigenFrame, EighOptions, StateVector, C64, I};
use crate::models::{apply_gauge, GaugeTransform, HamiltonianPath};

/// Uniform grid `t_k = t0 + k (t1 - t0) / steps`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub const MIN_STEPS: usize = 8;

    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) {
            return Err(Error::NonFinite("time grid"));
        }
        if t1 <= t0 {
            return Err(Error::InvalidParameter(format!("grid end {t1} must exceed start {t0}")));
        }
        if steps < Self::MIN_STEPS {
            return Err(Error::InvalidParameter(format!("grid needs at least {} steps, got {steps}", Self::MIN_STEPS)));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn span(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.node(k))
    }

    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.t0, self.t1, self.steps * factor)
    }
}

/// Coefficients `a_j` on a list of eigenlevels (0-based indices).
#[derive(Clone, Debug, PartialEq)]
pub struct Superposition {
    levels: Vec<usize>,
    coeffs: Vec<C64>,
}

impl Superposition {
    pub fn new(levels: Vec<usize>, coeffs: Vec<C64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("superposition needs at least one level".into()));
        }
        if levels.len() != coeffs.len() {
            return Err(Error::DimensionMismatch { expected: levels.len(), found: coeffs.len() });
        }
        let mut sorted = levels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("superposition levels must be distinct".into()));
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("superposition coefficients"));
        }
        let norm_sqr: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-10 {
            return Err(Error::NormalizationError { norm_sqr });
        }
        Ok(Self { levels, coeffs })
    }

    /// Coefficients on levels `0..coeffs.len()`.
    pub fn on_lowest(coeffs: Vec<C64>) -> Result<Self> {
        Self::new((0..coeffs.len()).collect(), coeffs)
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::on_lowest(coeffs.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn check_levels(&self, dim: usize) -> Result<()> {
        match self.levels.iter().find(|&&l| l >= dim) {
            Some(&level) => Err(Error::LevelOutOfRange { level, dim }),
            None => Ok(()),
        }
    }
}

/// Which instantaneous eigenbasis a trajectory is expressed in.
#[derive(Clone, Debug, PartialEq)]
pub enum GaugeMode {
    /// The path's closed-form eigenframe, as given.
    ClosedForm,
    /// Numerical eigenvectors, phase-aligned node to node from `t0`.
    NumericAligned,
    /// The closed-form frame (numeric-aligned if none exists) re-phased by a gauge.
    Twisted(GaugeTransform),
}

#[derive(Clone, Copy, Debug)]
pub struct TrajectoryOptions {
    /// Bound on the Richardson error estimate of every accumulated phase.
    pub quadrature_tol: f64,
    pub gap_min: f64,
    /// Largest number of trapezoid panels per grid interval tried when the
    /// connection can be evaluated between nodes.
    pub max_panels: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { quadrature_tol: 1e-8, gap_min: crate::linalg::DEFAULT_GAP_MIN, max_panels: 256 }
    }
}

/// Quadrature diagnostics of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureReport {
    pub panels_per_step: usize,
    pub richardson_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct AdiabaticTrajectory {
    grid: TimeGrid,
    frames: Vec<EigenFrame>,
    gamma: Vec<Vec<f64>>,
    avg_energy: Vec<Vec<f64>>,
    gauge: Option<GaugeTransform>,
    quadrature: QuadratureReport,
}

impl AdiabaticTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.frames[0].dim()
    }

    pub fn frames(&self) -> &[EigenFrame] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &EigenFrame {
        &self.frames[k]
    }

    /// Adiabatic phase of `level` at node `k`, in radians, unwrapped.
    pub fn gamma(&self, level: usize, k: usize) -> f64 {
        self.gamma[level][k]
    }

    pub fn gammas(&self, level: usize) -> &[f64] {
        &self.gamma[level]
    }

    pub fn avg_energy(&self, level: usize, k: usize) -> f64 {
        self.avg_energy[level][k]
    }

    /// The gauge this trajectory was twisted by, if any.
    pub fn gauge(&self) -> Option<&GaugeTransform> {
        self.gauge.as_ref()
    }

    pub fn quadrature(&self) -> QuadratureReport {
        self.quadrature
    }

    /// Time elapsed since the grid origin at node `k`.
    pub fn elapsed(&self, k: usize) -> f64 {
        self.grid.node(k) - self.grid.t0()
    }
}

pub fn build_trajectory(path: &dyn HamiltonianPath, grid: TimeGrid, mode: GaugeMode) -> Result<AdiabaticTrajectory> {
    build_trajectory_with(path, grid, mode, TrajectoryOptions::default())
}

/// Builds an adiabatic trajectory in the declared gauge.
///
/// With a closed-form frame the connection `i <phi_j|d_t phi_j>` is evaluated
/// analytically and integrated by composite trapezoid, doubling the panels
/// per grid step until the Richardson estimate `|T_h - T_2h| / 3` meets the
/// tolerance. Without one, eigenvectors are differentiated by fourth-order
/// finite differences at the nodes and the estimate is only checked.
pub fn build_trajectory_with(
    path: &dyn HamiltonianPath,
    grid: TimeGrid,
    mode: GaugeMode,
    opts: TrajectoryOptions,
) -> Result<AdiabaticTrajectory> {
    let dim = path.dim();
    let gauge = match &mode {
        GaugeMode::Twisted(g) if g.dim() != dim => {
            return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
        }
        GaugeMode::Twisted(g) => Some(g.clone()),
        _ => None,
    };
    let analytic = match mode {
        GaugeMode::ClosedForm => {
            if path.closed_form_frame(grid.t0()).is_none() {
                return Err(Error::NoClosedForm);
            }
            true
        }
        GaugeMode::NumericAligned => false,
        GaugeMode::Twisted(_) => {
            path.closed_form_frame(grid.t0()).is_some() && path.closed_form_frame_derivative(grid.t0()).is_some()
        }
    };

    let base = if analytic { closed_form_frames(path, &grid, opts)? } else { aligned_frames(path, &grid, opts)? };
    let frames: Vec<EigenFrame> = match &gauge {
        Some(g) => base.iter().zip(grid.nodes()).map(|(f, t)| apply_gauge(f, g, t)).collect::<Result<_>>()?,
        None => base,
    };

    let (gamma, imaginary, quadrature) = if analytic {
        let connection = |t: f64| analytic_connection(path, gauge.as_ref(), t);
        refined_phase_quadrature(&grid, dim, connection, opts)?
    } else {
        node_phase_quadrature(&grid, &frames, opts)?
    };
    for (level, im) in imaginary.iter().enumerate() {
        let residue = im.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if residue > 1e-10 {
            return Err(Error::ImaginaryResidue { level, residue });
        }
    }

    let avg_energy = (0..dim).map(|j| average_energies(&grid, &frames, j)).collect();
    Ok(AdiabaticTrajectory { grid, frames, gamma, avg_energy, gauge, quadrature })
}

fn closed_form_frames(path: &dyn HamiltonianPath, grid: &TimeGrid, opts: TrajectoryOptions) -> Result<Vec<EigenFrame>> {
    grid.nodes()
        .map(|t| {
            let frame = path.closed_form_frame(t).ok_or(Error::NoClosedForm)?;
            let h = path.hamiltonian(t)?;
            let tolerance = 1e-10 * h.frobenius_norm().max(1.0);
            let residual = frame.residual(&h);
            if residual > tolerance {
                return Err(Error::FrameResidual { t, residual, tolerance });
            }
            if let Some((lower, gap)) = frame.min_gap() {
                if gap < opts.gap_min {
                    return Err(Error::DegenerateSpectrum { lower, upper: lower + 1, gap, gap_min: opts.gap_min });
                }
            }
            Ok(frame)
        })
        .collect()
}

fn aligned_frames(path: &dyn HamiltonianPath, grid: &TimeGrid, opts: TrajectoryOptions) -> Result<Vec<EigenFrame>> {
    let eigh_opts = EighOptions { gap_min: opts.gap_min };
    let mut frames: Vec<EigenFrame> = Vec::with_capacity(grid.len());
    for t in grid.nodes() {
        let raw = eigh_with(&path.hamiltonian(t)?, eigh_opts)?;
        let frame = match frames.last() {
            Some(prev) => align_phase(&raw, prev)?,
            None => raw,
        };
        frames.push(frame);
    }
    Ok(frames)
}

/// `i <Phi_j|d_t Phi_j>` per level, split into real and imaginary parts.
fn analytic_connection(path: &dyn HamiltonianPath, gauge: Option<&GaugeTransform>, t: f64) -> (Vec<f64>, Vec<f64>) {
    let frame = path.closed_form_frame(t).expect("closed form checked at build start");
    let deriv = path.closed_form_frame_derivative(t).expect("closed form checked at build start");
    let mut re = Vec::with_capacity(frame.dim());
    let mut im = Vec::with_capacity(frame.dim());
    for (j, (v, dv)) in frame.vectors().iter().zip(&deriv).enumerate() {
        let a = I * inner_unchecked(v, dv);
        // e^{i alpha} cancels in the bra-ket; only -alpha' survives.
        let shift = gauge.map_or(0.0, |g| g.alpha_dot(j, t));
        re.push(a.re - shift);
        im.push(a.im);
    }
    (re, im)
}

type PhaseTables = (Vec<Vec<f64>>, Vec<Vec<f64>>, QuadratureReport);

fn refined_phase_quadrature(
    grid: &TimeGrid,
    dim: usize,
    connection: impl Fn(f64) -> (Vec<f64>, Vec<f64>),
    opts: TrajectoryOptions,
) -> Result<PhaseTables> {
    let n = grid.steps();
    // samples[i] holds the integrand at t0 + i * dt / panels.
    let mut panels = 1usize;
    let mut samples: Vec<(Vec<f64>, Vec<f64>)> = grid.nodes().map(&connection).collect();
    let mut coarse: Option<Vec<Vec<f64>>> = None;
    loop {
        let h = grid.dt() / panels as f64;
        let (re, im) = cumulative_at_nodes(&samples, dim, panels, n, h);
        let estimate = match &coarse {
            Some(prev) => richardson(&re, prev, 1),
            // Single panel: compare against the 2h rule on even nodes.
            None => richardson_even(&re, &even_node_trapezoid(&samples, dim, n, h)),
        };
        if estimate <= opts.quadrature_tol {
            return Ok((re, im, QuadratureReport { panels_per_step: panels, richardson_estimate: estimate }));
        }
        if panels * 2 > opts.max_panels {
            return Err(Error::NonConvergedQuadrature { estimate, tolerance: opts.quadrature_tol });
        }
        coarse = Some(re);
        panels *= 2;
        let h_new = grid.dt() / panels as f64;
        let mut refined = Vec::with_capacity(2 * samples.len() - 1);
        for (i, s) in samples.into_iter().enumerate() {
            if i > 0 {
                let t_mid = grid.t0() + (2 * i - 1) as f64 * h_new;
                refined.push(connection(t_mid));
            }
            refined.push(s);
        }
        samples = refined;
    }
}

/// Cumulative trapezoid over `samples` (spacing `h`), read out at every
/// `panels`-th point.
fn cumulative_at_nodes(
    samples: &[(Vec<f64>, Vec<f64>)],
    dim: usize,
    panels: usize,
    steps: usize,
    h: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut re = vec![Vec::with_capacity(steps + 1); dim];
    let mut im = vec![Vec::with_capacity(steps + 1); dim];
    let mut acc_re = vec![0.0; dim];
    let mut acc_im = vec![0.0; dim];
    for j in 0..dim {
        re[j].push(0.0);
        im[j].push(0.0);
    }
    for (i, w) in samples.windows(2).enumerate() {
        for j in 0..dim {
            acc_re[j] += 0.5 * h * (w[0].0[j] + w[1].0[j]);
            acc_im[j] += 0.5 * h * (w[0].1[j] + w[1].1[j]);
        }
        if (i + 1) % panels == 0 {
            for j in 0..dim {
                re[j].push(acc_re[j]);
                im[j].push(acc_im[j]);
            }
        }
    }
    (re, im)
}

/// Trapezoid with spacing `2h` over node samples, at even nodes.
fn even_node_trapezoid(samples: &[(Vec<f64>, Vec<f64>)], dim: usize, steps: usize, h: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0]; dim];
    let mut acc = vec![0.0; dim];
    let mut k = 0;
    while k + 2 <= steps {
        for j in 0..dim {
            acc[j] += h * (samples[k].0[j] + samples[k + 2].0[j]);
            out[j].push(acc[j]);
        }
        k += 2;
    }
    out
}

fn richardson(fine: &[Vec<f64>], coarse: &[Vec<f64>], stride: usize) -> f64 {
    fine.iter()
        .zip(coarse)
        .flat_map(|(f, c)| f.iter().step_by(stride).zip(c).map(|(a, b)| (a - b).abs() / 3.0))
        .fold(0.0, f64::max)
}

fn richardson_even(fine: &[Vec<f64>], even: &[Vec<f64>]) -> f64 {
    richardson(fine, even, 2)
}

/// Phases from finite-difference derivatives of the node frames.
fn node_phase_quadrature(grid: &TimeGrid, frames: &[EigenFrame], opts: TrajectoryOptions) -> Result<PhaseTables> {
    let dim = frames[0].dim();
    let h = grid.dt();
    let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..frames.len())
        .map(|k| {
            let mut re = Vec::with_capacity(dim);
            let mut im = Vec::with_capacity(dim);
            for j in 0..dim {
                let dv = stencil_derivative(frames, j, k, h);
                let a = I * inner_unchecked(frames[k].vector(j), &dv);
                re.push(a.re);
                im.push(a.im);
            }
            (re, im)
        })
        .collect();
    let (re, im) = cumulative_at_nodes(&samples, dim, 1, grid.steps(), h);
    let half = even_node_trapezoid(&samples, dim, grid.steps(), h);
    let estimate = richardson_even(&re, &half);
    if estimate > opts.quadrature_tol {
        return Err(Error::NonConvergedQuadrature { estimate, tolerance: opts.quadrature_tol });
    }
    Ok((re, im, QuadratureReport { panels_per_step: 1, richardson_estimate: estimate }))
}

/// Fourth-order derivative of level `j` at node `k`: centred in the interior,
/// one-sided five-point stencils at the two nodes nearest each end.
fn stencil_derivative(frames: &[EigenFrame], j: usize, k: usize, h: f64) -> StateVector {
    let last = frames.len() - 1;
    let (start, weights): (usize, [f64; 5]) = match k {
        0 => (0, [-25.0, 48.0, -36.0, 16.0, -3.0]),
        1 => (0, [-3.0, -10.0, 18.0, -6.0, 1.0]),
        _ if k == last => (last - 4, [3.0, -16.0, 36.0, -48.0, 25.0]),
        _ if k == last - 1 => (last - 4, [-1.0, 6.0, -18.0, 10.0, 3.0]),
        _ => (k - 2, [1.0, -8.0, 0.0, 8.0, -1.0]),
    };
    let mut acc = StateVector::zeros(frames[k].dim());
    for (i, w) in weights.iter().enumerate() {
        if *w != 0.0 {
            acc = acc.add_scaled(C64::new(w / (12.0 * h), 0.0), frames[start + i].vector(j));
        }
    }
    acc
}

fn average_energies(grid: &TimeGrid, frames: &[EigenFrame], level: usize) -> Vec<f64> {
    let h = grid.dt();
    let mut out = Vec::with_capacity(frames.len());
    out.push(frames[0].energy(level));
    let mut integral = 0.0;
    for (k, w) in frames.windows(2).enumerate() {
        integral += 0.5 * h * (w[0].energy(level) + w[1].energy(level));
        out.push(integral / (grid.node(k + 1) - grid.t0()));
    }
    out
}

/// Time-averaged energy of `level` over `[t0, t_k]`; `E_j(t0)` at `k = 0`.
pub fn average_energy(traj: &AdiabaticTrajectory, level: usize, k: usize) -> Result<f64> {
    if level >= traj.dim() {
        return Err(Error::LevelOutOfRange { level, dim: traj.dim() });
    }
    Ok(traj.avg_energy(level, k))
}

/// `sum_j a_j e^{i gamma_j} e^{-i t <E_j>} |phi_j; t>` at node `k`.
pub fn adiabatic_state(traj: &AdiabaticTrajectory, s: &Superposition, k: usize) -> Result<StateVector> {
    adiabatic_state_traced(traj, s, k, 1.0)
}

/// Like [`adiabatic_state`] with the adiabatic phase differences scaled by
/// `tracer`: level `j` carries `gamma_r + tracer (gamma_j - gamma_r)`, where
/// `r` is the first level of the superposition.
pub fn adiabatic_state_traced(traj: &AdiabaticTrajectory, s: &Superposition, k: usize, tracer: f64) -> Result<StateVector> {
    s.check_levels(traj.dim())?;
    Ok(traced_state(traj, s, k, tracer))
}

pub(crate) fn traced_state(traj: &AdiabaticTrajectory, s: &Superposition, k: usize, tracer: f64) -> StateVector {
    let tau = traj.elapsed(k);
    let frame = traj.frame(k);
    let reference = traj.gamma(s.levels()[0], k);
    let mut psi = StateVector::zeros(traj.dim());
    for (&j, &a) in s.levels().iter().zip(s.coeffs()) {
        let gamma = reference + tracer * (traj.gamma(j, k) - reference);
        let phase = phase_factor(gamma - tau * traj.avg_energy(j, k));
        psi = psi.add_scaled(a * phase, frame.vector(j));
    }
    psi
}

/// `a_j e^{-i alpha_j(t0)}`: the same initial state expanded in the twisted basis.
pub fn transform_superposition(s: &Superposition, g: &GaugeTransform, t0: f64) -> Result<Superposition> {
    s.check_levels(g.dim())?;
    let coeffs = s
        .levels()
        .iter()
        .zip(s.coeffs())
        .map(|(&j, &a)| a * phase_factor(-g.alpha(j, t0)))
        .collect();
    Ok(Superposition { levels: s.levels().to_vec(), coeffs })
}

/// Adiabatic phase of every level after one period of a cyclic path.
///
/// Fails unless the trajectory spans exactly `period` and every eigenvector
/// returns to its starting value within 1e-8.
pub fn berry_phase_per_level(traj: &AdiabaticTrajectory, period: f64) -> Result<Vec<f64>> {
    let span = traj.grid().span();
    if (span - period).abs() > 1e-9 * period.abs().max(1.0) {
        return Err(Error::PeriodMismatch { span, period });
    }
    let last = traj.grid().steps();
    for level in 0..traj.dim() {
        let distance = traj.frame(0).vector(level).distance(traj.frame(last).vector(level));
        if distance > 1e-8 {
            return Err(Error::NotCyclic { level, distance });
        }
    }
    Ok((0..traj.dim()).map(|j| traj.gamma(j, last)).collect())
}

/// Unwrapped `arg <reference_j|other_j>` along the grid: the gauge function
/// `alpha_j(t_k)` carrying `reference`'s basis onto `other`'s.
pub fn relative_gauge(reference: &AdiabaticTrajectory, other: &AdiabaticTrajectory, level: usize) -> Result<Vec<f64>> {
    if reference.grid() != other.grid() {
        return Err(Error::GridMismatch);
    }
    if level >= reference.dim() || level >= other.dim() {
        return Err(Error::LevelOutOfRange { level, dim: reference.dim().min(other.dim()) });
    }
    let mut out: Vec<f64> = Vec::with_capacity(reference.grid().len());
    for (a, b) in reference.frames().iter().zip(other.frames()) {
        let raw = inner_unchecked(a.vector(level), b.vector(level)).arg();
        let value = match out.last() {
            Some(&prev) => raw + 2.0 * PI * ((prev - raw) / (2.0 * PI)).round(),
            None => raw,
        };
        out.push(value);
    }
    Ok(out)
}
