//! Integer completely-positive factorizations `A = V·Vᵀ` (with `V` a
//! nonnegative integer matrix) for 2×2 doubly nonnegative integer matrices,
//! plus an exact branch-and-bound search for the integer cp-rank.
//!
//! * [`squares`]: minimal sums of squares.
//! * [`rank1`]: rank-1 matrices of any order via the gcd of the diagonal.
//! * [`cp2`]: congruence reduction and split templates, at most 11 columns.
//! * [`oracle`]: exact integer cp-rank by iterative deepening.
//! * [`cli`]: argument parsing and the batch scan harness.

pub mod cli;
pub mod cp2;
pub mod error;
pub mod exact_matrix;
pub mod oracle;
pub mod rank1;
pub mod squares;

pub use error::{Error, Result};
pub use exact_matrix::{is_dnn, is_rank1_dnn, verify, Factorization, Mat2, MatN, Method, VecN};
