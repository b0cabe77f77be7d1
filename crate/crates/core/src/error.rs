use thiserror::Error;

/// Errors raised by the numerical kernel, the transforms and the PDE builders.
///
/// Inadmissible feedback and unsolvable internal loops are ordinary results
/// elsewhere in the crate; they only surface here when a caller asks for a
/// quantity that does not exist (for instance `a_s_via_feedback` with an
/// inadmissible `K`).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid gram matrix: {0}")]
    InvalidGram(String),

    #[error("{what} is numerically singular (condition number {cond:e})")]
    IllConditioned { what: &'static str, cond: f64 },

    #[error("matrix exponential out of range (|At|_1 = {0:e})")]
    ExpOverflow(f64),

    #[error("operator is not accretive (min eigenvalue of hermitian part {0:e})")]
    NotAccretive(f64),

    #[error("operator is not a contraction (norm {0})")]
    NotContraction(f64),

    #[error("accretivity constant is zero; strict contraction bound degenerates to 1")]
    DegenerateBound,

    #[error("operator is not uniformly accretive: {0}")]
    NotUniformlyAccretive(String),

    #[error("feedback operator is not admissible (condition of I - KD is {m_condition:e})")]
    Inadmissible { m_condition: f64 },

    #[error("structural flag violated: {0}")]
    FlagViolated(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, LabError>;
