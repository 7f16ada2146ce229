use thiserror::Error;

/// Errors raised by the laboratory. Every numerical failure is surfaced,
/// never clamped.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coefficient L_{k} breaks conjugate symmetry (deviation {deviation:e}); L must be real")]
    NonReal { k: i64, deviation: f64 },

    #[error("quadrature did not converge: change {change:e} with {points} points")]
    QuadratureNonConvergence { points: usize, change: f64 },

    #[error("moments are not positive definite: |alpha_{index}| = {modulus} >= 1")]
    IndefiniteMoments { index: usize, modulus: f64 },

    #[error("moments are not positive: c_0 = {c0}")]
    NonPositiveMass { c0: f64 },

    #[error("Toeplitz matrix is not positive definite: pivot {pivot:e} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("inverse recursion inconsistent: bracket constant term {residual:e}")]
    InconsistentInverse { residual: f64 },

    #[error("recursion inconsistent at step {index}: alpha vs -conj(Phi_(n+1)(0)) differ by {deviation:e}")]
    InconsistentAlpha { index: usize, deviation: f64 },

    #[error("moment order {have} too small, need {need}")]
    OrderTooSmall { have: usize, need: usize },

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("insufficient data: {usable} usable points, need {required}")]
    InsufficientData { usable: usize, required: usize },

    #[error("closed form is near-singular: |1 - conj(zeta) z| = {0:e}")]
    NearSingular(f64),

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
