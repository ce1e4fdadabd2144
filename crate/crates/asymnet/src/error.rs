use crate::residual::ResidualReport;
use crate::staggered_grid::Family;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain {nu}x{nv}: {reason}")]
    InvalidDomain {
        nu: usize,
        nv: usize,
        reason: &'static str,
    },

    #[error("expected a {expected:?} field, got {found:?}")]
    FamilyMismatch { expected: Family, found: Family },

    #[error("site ({i}, {j}) is outside the {family:?} range")]
    OutOfRange { family: Family, i: usize, j: usize },

    #[error("{what}: expected {expected} values, got {found}")]
    LengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at site ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("degenerate quad ({i}, {j}): M = {m:e} is not above {tol:e}")]
    Degenerate { i: usize, j: usize, m: f64, tol: f64 },

    #[error("vertex ({i}, {j}) is not planar: residual {residual:e} exceeds {tol:e}")]
    NonPlanar {
        i: usize,
        j: usize,
        residual: f64,
        tol: f64,
    },

    #[error("co-normals disagree at vertex ({i}, {j}): misalignment {misalignment:e}")]
    GaugeInconsistent { i: usize, j: usize, misalignment: f64 },

    #[error("verification failed: {}", .0.name)]
    Verification(Box<ResidualReport>),

    #[error("frame determinant {found:e} does not match Omega^2 = {expected:e}")]
    FrameDeterminant { expected: f64, found: f64 },

    #[error("frame is degenerate: determinant {det:e}")]
    DegenerateFrame { det: f64 },

    #[error("input data is not compatible: {} residual {:e}", .0.name, .0.max_abs)]
    Incompatible(Box<ResidualReport>),

    #[error("input data is not integrable: {} residual {:e}", .0.name, .0.max_abs)]
    NotIntegrable(Box<ResidualReport>),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unsupported format version {found:?}, expected {expected:?}")]
    Version { expected: String, found: String },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
