//! Exact integer linear algebra: Hermite and Smith normal forms, integer
//! kernels and canonical coset representatives.
//!
//! Entries are stored as `i64`. The normal-form algorithms work on a 128-bit
//! copy and fail with [`LinalgError::Overflow`] rather than wrap.

mod hnf;
mod matrix;
mod snf;

pub use hnf::{canonical_residue, hnf, hnf_with_transform, integer_kernel, span_hnf, HnfBasis};
pub use matrix::IntMatrix;
pub use snf::{snf, SnfDecomposition};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix has column rank {rank}, expected {cols}")]
    RankDeficient { rank: usize, cols: usize },
    #[error("integer overflow beyond 128-bit working width")]
    Overflow,
}
