use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |H_jk - conj(H_kj)| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("degenerate spectrum: gap {gap:e} between levels {lower} and {upper} is below {gap_min:e}")]
    DegenerateSpectrum {
        lower: usize,
        upper: usize,
        gap: f64,
        gap_min: f64,
    },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    EigenNotConverged { sweeps: usize, off: f64 },

    #[error("branch mismatch on level {level}: overlap magnitude {overlap:.3} <= 0.5")]
    BranchMismatch { level: usize, overlap: f64 },

    #[error("bad sample grid: {0}")]
    BadSampleGrid(String),

    #[error("time {t} outside sampled window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("path has no closed-form eigenframe")]
    NoClosedForm,

    #[error("eigenframe residual {residual:e} exceeds {tolerance:e} at t = {t}")]
    FrameResidual { t: f64, residual: f64, tolerance: f64 },

    #[error("quadrature not converged: Richardson estimate {estimate:e} exceeds {tolerance:e}")]
    NonConvergedQuadrature { estimate: f64, tolerance: f64 },

    #[error("adiabatic phase of level {level} has imaginary residue {residue:e}")]
    ImaginaryResidue { level: usize, residue: f64 },

    #[error("level {level} out of range for dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },

    #[error("component {component} out of range for dimension {dim}")]
    ComponentOutOfRange { component: usize, dim: usize },

    #[error("superposition is not normalized (sum |a_j|^2 = {norm_sqr})")]
    NormalizationError { norm_sqr: f64 },

    #[error("eigenbasis is not cyclic: endpoint distance {distance:e} on level {level}")]
    NotCyclic { level: usize, distance: f64 },

    #[error("trajectory span {span} does not match period {period}")]
    PeriodMismatch { span: f64, period: f64 },

    #[error("norm drift {drift:e} exceeds {limit:e}; refine the time grid")]
    NormDriftExceeded { drift: f64, limit: f64 },

    #[error("trajectories are defined on different grids")]
    GridMismatch,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
