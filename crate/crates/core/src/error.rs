use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label `{0}` appears in both operands")]
    LabelCollision(String),
    #[error("factor `{0}` has dimension 0")]
    ZeroDim(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("operator is not square on matching spaces")]
    NotSquare,
    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("dimension chain violated at slot {slot}: {lhs} != {rhs}")]
    DimensionChain { slot: usize, lhs: usize, rhs: usize },
    #[error("not a pure comb for this layout (residual {0:.3e})")]
    NotPureComb(f64),
    #[error("not a pure superchannel (residual {0:.3e})")]
    NotPureSuperchannel(f64),
    #[error("decomposition inconsistent: {0}")]
    Decomposition(String),
    #[error("spanning family unstable: {0}")]
    Stability(String),
    #[error("malformed matrix file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
