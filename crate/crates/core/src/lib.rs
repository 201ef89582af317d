//! Dense linear algebra for pure superchannels and quantum combs.
//!
//! Operators carry labeled tensor-factor spaces ([`SystemDims`]), so every
//! contraction, trace and permutation is driven by labels rather than positions.
//! Composite indices are row-major: the last factor varies fastest.
//!
//! The main entry points are
//! [`superchannel::verify_pure_superchannel`], [`superchannel::direct_sum_decompose`]
//! and [`comb::staircase_decompose`].

pub mod builders;
pub mod choi;
pub mod comb;
mod error;
mod linalg;
pub mod matrix_file;
pub mod subspace;
pub mod superchannel;
pub mod tensor;

pub use choi::ChoiOp;
pub use comb::{CombCircuit, SlotLayout};
pub use error::{Error, Result};
pub use matrix_file::MatrixFile;
pub use subspace::Subspace;
pub use superchannel::{Classification, DirectSumDecomp, Triple, TwoSlotLayout};
pub use tensor::{CVec, Factor, LinOp, SystemDims, C64};

/// Default tolerances.
pub mod tol {
    /// Max-norm bound on `A†A - I`.
    pub const UNITARY: f64 = 1e-8;
    /// Relative singular-value cut for numerical rank.
    pub const RANK: f64 = 1e-9;
    /// Orthogonality, subset and residual tests (max-norm).
    pub const TEST: f64 = 1e-8;
}
