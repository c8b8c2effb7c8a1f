use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested tree would have 2^N terminal nodes beyond the cap.
    #[error("lattice of {requested} steps exceeds the cap of {cap}")]
    SizeLimit { requested: usize, cap: usize },

    #[error("shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The inf-convolution may be -inf (lower-affine certificates disagree).
    #[error("ill-posed: {0}")]
    IllPosed(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("penalized values diverged at step {step} (|y| = {magnitude:e}); the constraint set is likely infeasible or the scheme unstable")]
    Divergence { step: usize, magnitude: f64 },

    #[error("penalization did not converge: gap {gap:e} at m = {m}")]
    NonConvergence { m: f64, gap: f64 },
}
