use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not nonnegative: entry ({row},{col}) = {value}")]
    Negative { row: usize, col: usize, value: i64 },

    #[error("not PSD: {a}·{c} < {b_squared}")]
    NotPsd { a: u64, c: u64, b_squared: u128 },

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("matrix is not symmetric: ({i},{j}) = {upper} but ({j},{i}) = {lower}")]
    NotSymmetric {
        i: usize,
        j: usize,
        upper: i64,
        lower: i64,
    },

    #[error("matrix is not rank-1 positive semidefinite: a[{i}][{j}]² ≠ a[{i}][{i}]·a[{j}][{j}]")]
    NotRank1 { i: usize, j: usize },

    #[error("dimension mismatch: matrix has order {order}, column {column} has length {len}")]
    DimensionMismatch {
        order: usize,
        column: usize,
        len: usize,
    },

    #[error("matrix is not reduced: b = {b} exceeds min(a, c) = {min_diag}")]
    NotReduced { b: u64, min_diag: u64 },

    #[error("entry {value} exceeds the supported range (max {max})")]
    OutOfRange { value: u64, max: u64 },

    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),

    #[error("oracle inconclusive after {nodes} nodes: {lower} ≤ rank ≤ {upper}")]
    Inconclusive { lower: u32, upper: u32, nodes: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}
