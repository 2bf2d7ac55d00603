//! Error type shared by every operation in the crate.

/// Everything that can go wrong in the library.
///
/// Variants are deliberately coarse: callers (notably the CLI) map them onto
/// a small set of exit codes, and tests match on them to pin contracts.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension {0} is odd; this factorization requires an even dimension")]
    OddDimension(usize),

    #[error("matrix is {rows}x{cols}; a square matrix is required")]
    NonSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("input is not unitary: max |U\u{2020}U - I| = {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("reconstruction check failed: residual {residual:.3e} exceeds {tol:.3e}")]
    VerificationFailed { residual: f64, tol: f64 },

    #[error("wrong transform kind: expected {expected}, found {found}")]
    WrongTransform {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
