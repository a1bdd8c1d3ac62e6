//! States over labeled register layouts.
//!
//! Every amplitude vector and operator is indexed row-major over its
//! [`SystemLayout`], first register slowest. Operations address registers
//! by name, so callers never deal with raw axis positions.

mod density;
mod layout;
pub mod linalg;
mod measures;
mod pure;
mod unitary;

use thiserror::Error;

pub use density::DensityOperator;
pub use layout::{Register, SystemLayout};
pub use linalg::{CMatrix, C64};
pub use measures::{fidelity, maximally_entangled, purify, trace_distance};
pub use pure::PureState;
pub use unitary::{haar_unitary, Unitary};

/// Tolerance for norms, traces, Hermiticity and unitarity checks.
pub const NORM_TOL: f64 = 1e-9;

/// Eigenvalues at or below this are zero for rank and entropy purposes.
pub const EIGEN_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("register `{0}` appears more than once")]
    DuplicateRegister(String),
    #[error("register `{0}` has dimension 0")]
    ZeroDimension(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("operator trace {0} is not 1")]
    BadTrace(f64),
    #[error("operator has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("layouts differ: {0} vs {1}")]
    LayoutMismatch(String, String),
}
