//! Time-dependent Hamiltonians: the spin-1/2 precessing-field model, gauge
//! re-phasings of an eigenbasis, and Hamiltonians interpolated from samples.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{phase_factor, EigenFrame, HermitianOperator, StateVector, C64, I};

/// A Hermitian operator-valued function of time.
///
/// Paths that know their eigenframe in closed form expose it (and its time
/// derivative) so the adiabatic engine can evaluate the connection exactly.
pub trait HamiltonianPath: Send + Sync {
    fn dim(&self) -> usize;

    fn hamiltonian(&self, t: f64) -> Result<HermitianOperator>;

    fn closed_form_frame(&self, _t: f64) -> Option<EigenFrame> {
        None
    }

    /// `d/dt |phi_j; t>` for each level of [`HamiltonianPath::closed_form_frame`].
    fn closed_form_frame_derivative(&self, _t: f64) -> Option<Vec<StateVector>> {
        None
    }
}

/// Spin-1/2 in a field of fixed magnitude tilted by `theta` from z and
/// precessing about z at `omega0`.
///
/// Only the product of magnetic moment and field strength enters, so it is
/// stored as one number (an angular frequency, hbar = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinHalfParams {
    mu_b: f64,
    theta: f64,
    omega0: f64,
}

impl SpinHalfParams {
    /// `mu_b > 0`, `theta` in the open interval `(0, pi)`.
    pub fn new(mu_b: f64, theta: f64, omega0: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, pi)")));
        }
        Self::including_poles(mu_b, theta, omega0)
    }

    /// Like [`SpinHalfParams::new`] but also accepts the poles `theta = 0`
    /// and `theta = pi`, where the precession is a pure gauge artifact.
    pub fn including_poles(mu_b: f64, theta: f64, omega0: f64) -> Result<Self> {
        if !(mu_b.is_finite() && mu_b > 0.0) {
            return Err(Error::InvalidParameter(format!("mu_B = {mu_b} must be positive")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta = {theta} must lie in [0, pi]")));
        }
        if !omega0.is_finite() {
            return Err(Error::NonFinite("omega0"));
        }
        Ok(Self { mu_b, theta, omega0 })
    }

    /// Parameters for a given adiabaticity ratio `omega0 / mu_B`.
    pub fn with_adiabaticity(mu_b: f64, theta: f64, epsilon: f64) -> Result<Self> {
        Self::new(mu_b, theta, epsilon * mu_b)
    }

    pub fn mu_b(&self) -> f64 {
        self.mu_b
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// `|omega0| / mu_B`. Diagnostic only; no threshold is enforced.
    pub fn adiabaticity(&self) -> f64 {
        self.omega0.abs() / self.mu_b
    }

    /// Field period `2 pi / |omega0|`, undefined for a static field.
    pub fn period(&self) -> Option<f64> {
        (self.omega0 != 0.0).then(|| 2.0 * PI / self.omega0.abs())
    }
}

/// `(mu_B / 2) (sin(theta) cos(omega0 t) sigma_x + sin(theta) sin(omega0 t) sigma_y + cos(theta) sigma_z)`.
pub fn spin_half_hamiltonian(p: &SpinHalfParams, t: f64) -> HermitianOperator {
    let half = 0.5 * p.mu_b;
    let (st, ct) = p.theta.sin_cos();
    let az = half * ct;
    let off = phase_factor(-p.omega0 * t) * (half * st);
    HermitianOperator::new(2, vec![C64::new(az, 0.0), off, off.conj(), C64::new(-az, 0.0)])
        .expect("spin-1/2 Hamiltonian is Hermitian by construction")
}

/// Closed-form eigenframe in the reference gauge:
/// `|phi_1> = (-sin(theta/2), cos(theta/2) e^{i omega0 t})` with energy `-mu_B/2`,
/// `|phi_2> = (cos(theta/2), sin(theta/2) e^{i omega0 t})` with energy `+mu_B/2`.
pub fn spin_half_eigenframe(p: &SpinHalfParams, t: f64) -> EigenFrame {
    let (s, c) = (0.5 * p.theta).sin_cos();
    let rot = phase_factor(p.omega0 * t);
    let lower = StateVector::from_raw(vec![C64::new(-s, 0.0), rot * c]);
    let upper = StateVector::from_raw(vec![C64::new(c, 0.0), rot * s]);
    EigenFrame::from_parts(vec![-0.5 * p.mu_b, 0.5 * p.mu_b], vec![lower, upper])
        .expect("two levels of dimension two")
}

/// Time derivative of [`spin_half_eigenframe`].
pub fn spin_half_eigenframe_derivative(p: &SpinHalfParams, t: f64) -> Vec<StateVector> {
    let (s, c) = (0.5 * p.theta).sin_cos();
    let drot = I * p.omega0 * phase_factor(p.omega0 * t);
    let zero = C64::new(0.0, 0.0);
    vec![
        StateVector::from_raw(vec![zero, drot * c]),
        StateVector::from_raw(vec![zero, drot * s]),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinHalfPath(pub SpinHalfParams);

impl HamiltonianPath for SpinHalfPath {
    fn dim(&self) -> usize {
        2
    }

    fn hamiltonian(&self, t: f64) -> Result<HermitianOperator> {
        Ok(spin_half_hamiltonian(&self.0, t))
    }

    fn closed_form_frame(&self, t: f64) -> Option<EigenFrame> {
        Some(spin_half_eigenframe(&self.0, t))
    }

    fn closed_form_frame_derivative(&self, t: f64) -> Option<Vec<StateVector>> {
        Some(spin_half_eigenframe_derivative(&self.0, t))
    }
}

/// `alpha(t) = offset + rate t + amplitude sin(frequency t + shift)`.
///
/// Covers constant, linear and oscillatory re-phasings with an exact derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseProfile {
    pub offset: f64,
    pub rate: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub shift: f64,
}

impl PhaseProfile {
    pub fn constant(offset: f64) -> Self {
        Self { offset, ..Self::default() }
    }

    pub fn linear(offset: f64, rate: f64) -> Self {
        Self { offset, rate, ..Self::default() }
    }

    /// `c0 + c1 t + c2 sin(frequency t + c3)`.
    pub fn smooth([c0, c1, c2, c3]: [f64; 4], frequency: f64) -> Self {
        Self { offset: c0, rate: c1, amplitude: c2, frequency, shift: c3 }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.offset + self.rate * t + self.amplitude * (self.frequency * t + self.shift).sin()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.rate + self.amplitude * self.frequency * (self.frequency * t + self.shift).cos()
    }
}

/// Per-level re-phasing `|Phi_j; t> = e^{i alpha_j(t)} |phi_j; t>`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    phases: Vec<PhaseProfile>,
}

impl GaugeTransform {
    pub fn new(phases: Vec<PhaseProfile>) -> Result<Self> {
        let finite = phases.iter().all(|p| {
            [p.offset, p.rate, p.amplitude, p.frequency, p.shift].iter().all(|x| x.is_finite())
        });
        if !finite {
            return Err(Error::NonFinite("gauge parameters"));
        }
        if phases.is_empty() {
            return Err(Error::InvalidParameter("gauge needs at least one level".into()));
        }
        Ok(Self { phases })
    }

    pub fn identity(dim: usize) -> Self {
        Self { phases: vec![PhaseProfile::default(); dim] }
    }

    pub fn constants(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&c| PhaseProfile::constant(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[PhaseProfile] {
        &self.phases
    }

    pub fn alpha(&self, level: usize, t: f64) -> f64 {
        self.phases[level].value(t)
    }

    pub fn alpha_dot(&self, level: usize, t: f64) -> f64 {
        self.phases[level].derivative(t)
    }

    pub fn factors(&self, t: f64) -> Vec<C64> {
        self.phases.iter().map(|p| phase_factor(p.value(t))).collect()
    }
}

/// Multiplies vector `j` by `e^{i alpha_j(t)}`.
pub fn apply_gauge(frame: &EigenFrame, g: &GaugeTransform, t: f64) -> Result<EigenFrame> {
    if frame.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: frame.dim(), found: g.dim() });
    }
    Ok(frame.rephased(&g.factors(t)))
}

/// Hamiltonian interpolated entrywise from samples by local cubic Lagrange
/// polynomials through the four nearest nodes.
#[derive(Clone, Debug)]
pub struct SampledHamiltonian {
    dim: usize,
    times: Vec<f64>,
    samples: Vec<HermitianOperator>,
}

impl SampledHamiltonian {
    pub fn new(samples: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::BadSampleGrid(format!("need at least 4 samples, got {}", samples.len())));
        }
        let dim = samples[0].1.dim();
        for w in samples.windows(2) {
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::BadSampleGrid(format!("times must increase strictly ({} then {})", w[0].0, w[1].0)));
            }
        }
        if samples.iter().any(|(t, _)| !t.is_finite()) {
            return Err(Error::BadSampleGrid("non-finite sample time".into()));
        }
        if let Some((_, h)) = samples.iter().find(|(_, h)| h.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: h.dim() });
        }
        let (times, samples) = samples.into_iter().unzip();
        Ok(Self { dim, times, samples })
    }

    /// Samples an arbitrary path at the given times.
    pub fn from_path(path: &dyn HamiltonianPath, times: &[f64]) -> Result<Self> {
        let samples = times.iter().map(|&t| path.hamiltonian(t).map(|h| (t, h))).collect::<Result<_>>()?;
        Self::new(samples)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[HermitianOperator] {
        &self.samples
    }

    pub fn window(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Parses the plain-text sample format:
    ///
    /// ```text
    /// dim 2
    /// t 0.0
    /// 1+0j 0+0.5j
    /// 0-0.5j -1+0j
    /// t 0.1
    /// ...
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line_no, header) = lines.next().ok_or(Error::Parse { line: 0, message: "empty input".into() })?;
        let dim = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["dim", n] => n.parse::<usize>().map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?,
            _ => return Err(Error::Parse { line: line_no, message: format!("expected `dim N`, got `{header}`") }),
        };
        if dim == 0 {
            return Err(Error::Parse { line: line_no, message: "dim must be positive".into() });
        }

        let mut samples = Vec::new();
        while let Some((line_no, l)) = lines.next() {
            let t = match l.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["t", v] => v.parse::<f64>().map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?,
                _ => return Err(Error::Parse { line: line_no, message: format!("expected `t <value>`, got `{l}`") }),
            };
            let mut entries = Vec::with_capacity(dim * dim);
            for _ in 0..dim {
                let (row_no, row) = lines.next().ok_or(Error::Parse {
                    line: line_no,
                    message: format!("block at t = {t} has fewer than {dim} rows"),
                })?;
                let parsed = row
                    .split_whitespace()
                    .map(parse_complex)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|message| Error::Parse { line: row_no, message })?;
                if parsed.len() != dim {
                    return Err(Error::Parse { line: row_no, message: format!("expected {dim} entries, got {}", parsed.len()) });
                }
                entries.extend(parsed);
            }
            samples.push((t, HermitianOperator::new(dim, entries)?));
        }
        Self::new(samples)
    }

    /// Inverse of [`SampledHamiltonian::parse`], with round-trip precision.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim {}\n", self.dim);
        for (t, h) in self.times.iter().zip(&self.samples) {
            let _ = writeln!(out, "t {t:e}");
            for row in h.entries().chunks(self.dim) {
                let cells: Vec<String> = row.iter().map(|&z| format_complex(z)).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
        }
        out
    }
}

impl HamiltonianPath for SampledHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn hamiltonian(&self, t: f64) -> Result<HermitianOperator> {
        let (start, end) = self.window();
        let slack = 1e-12 * (end - start);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutOfWindow { t, start, end });
        }
        let n = self.times.len();
        // First node of the 4-point stencil, centred on the bracketing interval.
        let upper = self.times.partition_point(|&x| x <= t).clamp(1, n - 1);
        let first = upper.saturating_sub(2).min(n - 4);
        let nodes = &self.times[first..first + 4];

        let weights: Vec<f64> = (0..4)
            .map(|i| {
                (0..4)
                    .filter(|&m| m != i)
                    .map(|m| (t - nodes[m]) / (nodes[i] - nodes[m]))
                    .product()
            })
            .collect();

        let len = self.dim * self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); len];
        for (w, h) in weights.iter().zip(&self.samples[first..first + 4]) {
            for (acc, z) in entries.iter_mut().zip(h.entries()) {
                *acc += z * *w;
            }
        }
        HermitianOperator::symmetrized(self.dim, entries)
    }
}

/// Parses `re+imj`, `re-imj`, a bare real, or a bare imaginary `imj`.
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let bad = || format!("malformed complex entry `{s}`");
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not a leading sign or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            let im_text = &body[i..];
            let im = match im_text {
                "+" => 1.0,
                "-" => -1.0,
                _ => im_text.trim_start_matches('+').parse::<f64>().map_err(|_| bad())?,
            };
            Ok(C64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                _ => body.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(C64::new(0.0, im))
        }
    }
}

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{}{:e}j", z.re, sign, z.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, inner};

    fn params(theta: f64) -> SpinHalfParams {
        SpinHalfParams::new(10.0, theta, 0.1).unwrap()
    }

    #[test]
    fn field_along_z_at_theta_zero() {
        let p = SpinHalfParams::including_poles(4.0, 0.0, 0.3).unwrap();
        let h = spin_half_hamiltonian(&p, 1.7);
        let expected = HermitianOperator::pauli_z().scale(2.0);
        for (a, b) in h.entries().iter().zip(expected.entries()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn equatorial_field_at_time_zero() {
        let p = SpinHalfParams::new(10.0, PI / 2.0, 0.1).unwrap();
        let h = spin_half_hamiltonian(&p, 0.0);
        let expected = HermitianOperator::pauli_x().scale(5.0);
        for (a, b) in h.entries().iter().zip(expected.entries()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn eigenvalues_are_plus_minus_half_mu_b() {
        for &theta in &[0.2, PI / 3.0, 2.0] {
            for &t in &[0.0, 3.3, 41.0] {
                let f = eigh(&spin_half_hamiltonian(&params(theta), t)).unwrap();
                assert!((f.energy(0) + 5.0).abs() < 1e-13);
                assert!((f.energy(1) - 5.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(SpinHalfParams::new(0.0, 1.0, 0.1).is_err());
        assert!(SpinHalfParams::new(1.0, 0.0, 0.1).is_err());
        assert!(SpinHalfParams::new(1.0, PI, 0.1).is_err());
        assert!(SpinHalfParams::including_poles(1.0, PI, 0.1).is_ok());
        assert!(SpinHalfParams::new(1.0, 1.0, f64::NAN).is_err());
        assert_eq!(params(1.0).adiabaticity(), 0.01);
    }

    #[test]
    fn polar_limit_eigenvector() {
        let p = SpinHalfParams::including_poles(10.0, PI, 0.1).unwrap();
        let f = spin_half_eigenframe(&p, 0.0);
        assert!(f.vector(0).distance(&StateVector::from_real(&[-1.0, 0.0]).unwrap()) < 1e-15);
        assert_eq!(f.energy(0), -5.0);
    }

    #[test]
    fn closed_form_frame_diagonalizes_hamiltonian() {
        for &theta in &[0.1, PI / 3.0, PI / 2.0, 2.9] {
            for &t in &[0.0, 1.0, 17.5, 62.0] {
                let p = params(theta);
                let f = spin_half_eigenframe(&p, t);
                let h = spin_half_hamiltonian(&p, t);
                assert!(f.residual(&h) < 1e-12);
                assert!(f.orthonormality_error() < 1e-15);
                assert!(inner(f.vector(0), f.vector(1)).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_frame_is_cyclic() {
        let p = params(1.0);
        let period = p.period().unwrap();
        let a = spin_half_eigenframe(&p, 0.0);
        let b = spin_half_eigenframe(&p, period);
        for j in 0..2 {
            assert!(a.vector(j).distance(b.vector(j)) < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_numeric_eigenspaces() {
        let p = params(1.2);
        for &t in &[0.0, 5.0, 30.0] {
            let closed = spin_half_eigenframe(&p, t);
            let numeric = eigh(&spin_half_hamiltonian(&p, t)).unwrap();
            for j in 0..2 {
                assert!(closed.vector(j).projector_distance(numeric.vector(j)) < 1e-10);
            }
        }
    }

    #[test]
    fn frame_derivative_matches_finite_differences() {
        let p = params(0.9);
        let (t, h) = (3.0, 1e-5);
        let d = spin_half_eigenframe_derivative(&p, t);
        let plus = spin_half_eigenframe(&p, t + h);
        let minus = spin_half_eigenframe(&p, t - h);
        for (j, dj) in d.iter().enumerate() {
            let fd = plus.vector(j).add_scaled(C64::new(-1.0, 0.0), minus.vector(j)).scale(C64::new(0.5 / h, 0.0));
            assert!(fd.distance(dj) < 1e-9);
        }
    }

    #[test]
    fn gauge_preserves_eigen_structure() {
        let p = params(PI / 3.0);
        let g = GaugeTransform::new(vec![
            PhaseProfile { amplitude: 0.3, frequency: 0.1, ..Default::default() },
            PhaseProfile::linear(0.0, -1.1),
        ])
        .unwrap();
        for &t in &[0.0, 2.0, 50.0] {
            let f = spin_half_eigenframe(&p, t);
            let twisted = apply_gauge(&f, &g, t).unwrap();
            assert_eq!(twisted.energies(), f.energies());
            assert!(twisted.residual(&spin_half_hamiltonian(&p, t)) < 1e-12);
            assert!(twisted.orthonormality_error() < 1e-15);
        }
        let zero = apply_gauge(&spin_half_eigenframe(&p, 1.0), &GaugeTransform::identity(2), 1.0).unwrap();
        assert_eq!(zero, spin_half_eigenframe(&p, 1.0));
        assert!(apply_gauge(&spin_half_eigenframe(&p, 1.0), &GaugeTransform::identity(3), 1.0).is_err());
    }

    #[test]
    fn phase_profile_derivative_is_consistent() {
        let prof = PhaseProfile { offset: 0.4, rate: -1.3, amplitude: 1.7, frequency: 0.8, shift: 0.2 };
        let t = 2.5;
        for &h in &[1e-2, 5e-3] {
            let fd = (prof.value(t + h) - prof.value(t - h)) / (2.0 * h);
            // Central differences are second order: error ~ h^2 |alpha'''| / 6.
            assert!((fd - prof.derivative(t)).abs() < h * h * 1.7 * 0.8f64.powi(3));
        }
    }

    #[test]
    fn sampled_constant_is_reproduced() {
        let h = HermitianOperator::new(2, vec![C64::new(1.0, 0.0), C64::new(0.2, 0.3), C64::new(0.2, -0.3), C64::new(-0.4, 0.0)]).unwrap();
        let path = SampledHamiltonian::new((0..6).map(|k| (k as f64 * 0.5, h.clone())).collect()).unwrap();
        for &t in &[0.0, 0.3, 1.1, 2.5] {
            let got = path.hamiltonian(t).unwrap();
            for (a, b) in got.entries().iter().zip(h.entries()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        assert!(matches!(path.hamiltonian(2.6), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn sampled_grid_preconditions() {
        let h = HermitianOperator::identity(2);
        let two = vec![(0.0, h.clone()), (1.0, h.clone())];
        assert!(matches!(SampledHamiltonian::new(two), Err(Error::BadSampleGrid(_))));
        let unordered = vec![(0.0, h.clone()), (2.0, h.clone()), (1.0, h.clone()), (3.0, h.clone())];
        assert!(matches!(SampledHamiltonian::new(unordered), Err(Error::BadSampleGrid(_))));
        let mixed = vec![(0.0, h.clone()), (1.0, h.clone()), (2.0, h.clone()), (3.0, HermitianOperator::identity(3))];
        assert!(matches!(SampledHamiltonian::new(mixed), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sampled_spin_half_converges_at_fourth_order() {
        let p = params(1.0);
        let err = |n: usize| {
            let times: Vec<f64> = (0..=n).map(|k| 20.0 * k as f64 / n as f64).collect();
            let path = SampledHamiltonian::from_path(&SpinHalfPath(p), &times).unwrap();
            (0..200)
                .map(|k| 0.05 + k as f64 * 0.0987)
                .map(|t| {
                    let a = path.hamiltonian(t).unwrap();
                    let b = spin_half_hamiltonian(&p, t);
                    a.entries().iter().zip(b.entries()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(40), err(80));
        let ratio = coarse / fine;
        assert!(fine < 1e-6, "fine error {fine:e}");
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn parse_complex_forms() {
        assert_eq!(parse_complex("1.5+2j").unwrap(), C64::new(1.5, 2.0));
        assert_eq!(parse_complex("-1e-3-4.5e+2j").unwrap(), C64::new(-1e-3, -450.0));
        assert_eq!(parse_complex("0.25").unwrap(), C64::new(0.25, 0.0));
        assert_eq!(parse_complex("-2j").unwrap(), C64::new(0.0, -2.0));
        assert_eq!(parse_complex("3-j").unwrap(), C64::new(3.0, -1.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+xj").is_err());
    }

    #[test]
    fn sample_file_round_trip() {
        let p = params(0.7);
        let times: Vec<f64> = (0..5).map(|k| 0.3 * k as f64).collect();
        let path = SampledHamiltonian::from_path(&SpinHalfPath(p), &times).unwrap();
        let back = SampledHamiltonian::parse(&path.to_text()).unwrap();
        assert_eq!(back.times(), path.times());
        assert_eq!(back.samples(), path.samples());
    }

    #[test]
    fn sample_file_errors_carry_line_numbers() {
        let text = "dim 2\nt 0\n1+0j 0+0j\n0+0j\n";
        assert!(matches!(SampledHamiltonian::parse(text), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(SampledHamiltonian::parse("size 2\n"), Err(Error::Parse { line: 1, .. })));
        let non_herm = "dim 2\nt 0\n1 1j\n1j 1\n";
        assert!(matches!(SampledHamiltonian::parse(non_herm), Err(Error::NotHermitian { .. })));
    }
}
