//! Small dense complex linear algebra: state vectors, Hermitian operators and
//! their instantaneous eigenframes.
//!
//! Everything here is sized for N <= 16. The eigensolver is a cyclic complex
//! Jacobi iteration, which is slow asymptotically but deterministic and exact
//! enough to reconstruct the input to ~1e-14.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Symmetry tolerance accepted by [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default minimum spacing between consecutive eigenvalues.
pub const DEFAULT_GAP_MIN: f64 = 1e-8;

/// Jacobi stops when the off-diagonal Frobenius norm drops below this
/// fraction of the operator norm.
const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

fn check_finite(values: &[C64], what: &'static str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Unit-modulus factor `e^{i phase}`.
pub fn phase_factor(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

#[derive(Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("state vector must have dim >= 1".into()));
        }
        check_finite(&amps, "state vector")?;
        Ok(Self { amps })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The `k`-th standard basis vector.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amps: vec![C64::new(0.0, 0.0); dim] }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, k: usize) -> C64 {
        self.amps[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `|norm^2 - 1| <= 1e-10`.
    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-10
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter("cannot normalize the zero vector".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { amps: self.amps.iter().map(|&z| z * c).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: C64, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            amps: self.amps.iter().zip(&other.amps).map(|(&a, &b)| a + c * b).collect(),
        }
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Distance between the one-dimensional projectors `|u><u| - |v><v|` in
    /// Frobenius norm. Blind to global phase.
    pub fn projector_distance(&self, other: &Self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                let p = self.amps[j] * self.amps[k].conj();
                let q = other.amps[j] * other.amps[k].conj();
                acc += (p - q).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amps.iter()).finish()
    }
}

/// `sum_k conj(u_k) v_k`.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(inner_unchecked(u, v))
}

pub(crate) fn inner_unchecked(u: &StateVector, v: &StateVector) -> C64 {
    u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum()
}

/// Dense N x N Hermitian matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianOperator {
    /// Builds an operator from row-major entries, rejecting anything whose
    /// symmetry residual exceeds [`HERMITIAN_TOL`].
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("operator must have dim >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        check_finite(&entries, "operator")?;
        let op = Self { dim, entries };
        let residual = op.symmetry_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(op)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Self::new(dim, rows.concat())
    }

    /// Projects arbitrary entries onto the Hermitian part `(A + A^dagger) / 2`.
    pub fn symmetrized(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        check_finite(&entries, "operator")?;
        let mut out = entries.clone();
        for j in 0..dim {
            for k in 0..dim {
                out[j * dim + k] = (entries[j * dim + k] + entries[k * dim + j].conj()) * 0.5;
            }
        }
        Ok(Self { dim, entries: out })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for (k, &d) in diag.iter().enumerate() {
            entries[k * dim + k] = C64::new(d, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for k in 0..dim {
            op.entries[k * dim + k] = C64::new(1.0, 0.0);
        }
        op
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self { dim: 2, entries: vec![o, l, l, o] }
    }

    pub fn pauli_y() -> Self {
        let o = C64::new(0.0, 0.0);
        Self { dim: 2, entries: vec![o, -I, I, o] }
    }

    pub fn pauli_z() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self { dim: 2, entries: vec![l, o, o, -l] }
    }

    /// Spin projection `s_z = sigma_z / 2` (hbar = 1).
    pub fn spin_z() -> Self {
        Self::pauli_z().scale(0.5)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    /// Largest `|H_jk - conj(H_kj)|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.get(j, k) - self.get(k, j).conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &StateVector) -> StateVector {
        let n = self.dim;
        let amps = (0..n)
            .map(|j| (0..n).map(|k| self.entries[j * n + k] * v.amps[k]).sum())
            .collect();
        StateVector::from_raw(amps)
    }

    /// `<u|self|v>`.
    pub fn matrix_element(&self, u: &StateVector, v: &StateVector) -> Result<C64> {
        let hv = self.apply(v)?;
        inner(u, &hv)
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[C64]> = self.entries.chunks(self.dim).collect();
        f.debug_struct("HermitianOperator").field("dim", &self.dim).field("rows", &rows).finish()
    }
}

/// `<psi|O|psi>` for a normalized state.
pub fn expectation(psi: &StateVector, op: &HermitianOperator) -> Result<f64> {
    let value = op.matrix_element(psi, psi)?;
    let scale = op.frobenius_norm().max(1.0);
    assert!(
        value.im.abs() <= 1e-12 * scale,
        "quadratic form of a Hermitian operator has imaginary part {:e}",
        value.im
    );
    Ok(value.re)
}

/// Instantaneous eigenvalues (ascending) and orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenFrame {
    energies: Vec<f64>,
    vectors: Vec<StateVector>,
}

impl EigenFrame {
    /// Assembles a frame without checking orthonormality; callers that build
    /// frames by hand should run [`EigenFrame::residual`] and
    /// [`EigenFrame::orthonormality_error`].
    pub fn from_parts(energies: Vec<f64>, vectors: Vec<StateVector>) -> Result<Self> {
        let dim = energies.len();
        if vectors.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: vectors.len() });
        }
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("energies"));
        }
        Ok(Self { energies, vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, level: usize) -> f64 {
        self.energies[level]
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn vector(&self, level: usize) -> &StateVector {
        &self.vectors[level]
    }

    /// Smallest spacing between consecutive energies, with the lower level.
    pub fn min_gap(&self) -> Option<(usize, f64)> {
        self.energies
            .windows(2)
            .enumerate()
            .map(|(j, w)| (j, w[1] - w[0]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest `||H v_j - E_j v_j||`.
    pub fn residual(&self, h: &HermitianOperator) -> f64 {
        self.vectors
            .iter()
            .zip(&self.energies)
            .map(|(v, &e)| h.apply_unchecked(v).add_scaled(C64::new(-e, 0.0), v).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|<v_l|v_j> - delta_lj|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, vl) in self.vectors.iter().enumerate() {
            for (j, vj) in self.vectors.iter().enumerate() {
                let target = if l == j { 1.0 } else { 0.0 };
                worst = worst.max((inner_unchecked(vl, vj) - target).norm());
            }
        }
        worst
    }

    /// `sum_j E_j |v_j><v_j|`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let n = self.dim();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for (v, &e) in self.vectors.iter().zip(&self.energies) {
            for r in 0..n {
                for c in 0..n {
                    entries[r * n + c] += v.amps[r] * v.amps[c].conj() * e;
                }
            }
        }
        HermitianOperator { dim: n, entries }
    }

    /// Multiplies vector `j` by `phases[j]`; energies are untouched.
    pub fn rephased(&self, phases: &[C64]) -> Self {
        Self {
            energies: self.energies.clone(),
            vectors: self.vectors.iter().zip(phases).map(|(v, &p)| v.scale(p)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EighOptions {
    pub gap_min: f64,
}

impl Default for EighOptions {
    fn default() -> Self {
        Self { gap_min: DEFAULT_GAP_MIN }
    }
}

/// Eigendecomposition with the default gap threshold.
pub fn eigh(h: &HermitianOperator) -> Result<EigenFrame> {
    eigh_with(h, EighOptions::default())
}

/// Cyclic Jacobi eigendecomposition of a Hermitian operator.
///
/// Energies come back ascending. Each eigenvector has its largest-magnitude
/// component made real and positive.
pub fn eigh_with(h: &HermitianOperator, opts: EighOptions) -> Result<EigenFrame> {
    let n = h.dim;
    if n < 2 {
        return Err(Error::InvalidParameter("eigh requires dim >= 2".into()));
    }
    let residual = h.symmetry_residual();
    if residual > HERMITIAN_TOL * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }

    let mut a = h.entries.clone();
    for k in 0..n {
        a[k * n + k] = C64::new(a[k * n + k].re, 0.0);
    }
    let mut v = HermitianOperator::identity(n).entries;
    let tol = JACOBI_REL_TOL * h.frobenius_norm();

    let off_norm = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNotConverged { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].re.total_cmp(&a[y * n + y].re));

    let energies: Vec<f64> = order.iter().map(|&k| a[k * n + k].re).collect();
    let vectors: Vec<StateVector> = order
        .iter()
        .map(|&col| {
            let amps: Vec<C64> = (0..n).map(|row| v[row * n + col]).collect();
            fix_phase(StateVector::from_raw(amps))
        })
        .collect();

    let frame = EigenFrame { energies, vectors };
    if let Some((lower, gap)) = frame.min_gap() {
        if gap < opts.gap_min {
            return Err(Error::DegenerateSpectrum { lower, upper: lower + 1, gap, gap_min: opts.gap_min });
        }
    }
    Ok(frame)
}

/// One unitary rotation zeroing `a[p][q]`, accumulated into the columns of `v`.
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag <= f64::MIN_POSITIVE {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // Remove the phase of a_pq, then do a real symmetric rotation.
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase.conj() * -s;
    let g_qq = phase.conj() * c;

    // A <- A G
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * g_pp + akq * g_qp;
        a[k * n + q] = akp * g_pq + akq * g_qq;
    }
    // A <- G^dagger A
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = C64::new(a[q * n + q].re, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * g_pp + vkq * g_qp;
        v[k * n + q] = vkp * g_pq + vkq * g_qq;
    }
}

/// Rotates `v` so its largest-magnitude component is real and positive. Ties
/// within 1e-12 relative go to the lowest index.
fn fix_phase(v: StateVector) -> StateVector {
    let max = v.amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let Some(pivot) = v.amps.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied() else {
        return v;
    };
    if max == 0.0 {
        return v;
    }
    v.scale(pivot.conj() / pivot.norm())
}

/// Re-phases each vector of `frame` so that `<reference_j|frame_j>` is real and
/// positive.
pub fn align_phase(frame: &EigenFrame, reference: &EigenFrame) -> Result<EigenFrame> {
    if frame.dim() != reference.dim() {
        return Err(Error::DimensionMismatch { expected: reference.dim(), found: frame.dim() });
    }
    let mut phases = Vec::with_capacity(frame.dim());
    for (level, (v, r)) in frame.vectors.iter().zip(&reference.vectors).enumerate() {
        let overlap = inner_unchecked(r, v);
        let mag = overlap.norm();
        if mag <= 0.5 {
            return Err(Error::BranchMismatch { level, overlap: mag });
        }
        phases.push(overlap.conj() / mag);
    }
    Ok(frame.rephased(&phases))
}
