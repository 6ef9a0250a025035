//! Integer cp-factorization of rank-1 doubly nonnegative matrices of any
//! order.
//!
//! Writing `A = d·B` with `d` the gcd of the diagonal, every diagonal entry of
//! `B` is a perfect square, so `B = v·vᵀ` and a minimal square decomposition
//! `d = Σ s_k²` gives the columns `s_k·v`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_matrix::{rank1_violation, Factorization, MatN, Method, VecN};
use crate::squares::{decompose, exact_sqrt, min_square_count, SquareDecomp};

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Witness for the structure of a nonzero rank-1 matrix: `A = d·(base·baseᵀ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rank1Cert {
    pub d: u64,
    pub base: VecN,
    pub squares: SquareDecomp,
}

fn ensure_rank1(m: &MatN) -> Result<()> {
    match rank1_violation(m) {
        Some((i, j)) => Err(Error::NotRank1 { i, j }),
        None => Ok(()),
    }
}

/// Builds the certificate for a nonzero rank-1 DNN matrix; `None` for the
/// zero matrix.
pub fn rank1_certificate(m: &MatN) -> Result<Option<Rank1Cert>> {
    ensure_rank1(m)?;
    if m.is_zero() {
        return Ok(None);
    }
    let d = m.diagonal().fold(0, gcd);
    let base = m
        .diagonal()
        .map(|x| exact_sqrt(x / d).expect("diagonal of A/d is a perfect square for rank-1 A"))
        .collect();
    Ok(Some(Rank1Cert {
        d,
        base: VecN(base),
        squares: decompose(d),
    }))
}

/// Minimal integer cp-factorization of a rank-1 DNN matrix.
pub fn factor_rank1(m: &MatN) -> Result<Factorization> {
    let Some(cert) = rank1_certificate(m)? else {
        return Ok(Factorization::empty(Method::Rank1));
    };
    let columns = cert
        .squares
        .parts
        .iter()
        .map(|&s| cert.base.scaled(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Factorization::new(columns, Method::Rank1))
}

/// `min_square_count(gcd of the diagonal)`, or 0 for the zero matrix.
pub fn rank1_cp_rank(m: &MatN) -> Result<u32> {
    ensure_rank1(m)?;
    let d = m.diagonal().fold(0, gcd);
    Ok(min_square_count(d) as u32)
}
