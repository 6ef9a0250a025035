//! Integer matrix value types, doubly-nonnegative validation and exact
//! reconstruction checks.
//!
//! Every quantity here is an exact integer. Products of two entries are
//! formed in 128-bit arithmetic, so no determinant or outer-product sum can
//! wrap for `u64` entries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest entry accepted by the factorization pipeline and the CLI.
///
/// Square counting relies on trial division up to `√x`, which stays fast
/// below this cap.
pub const MAX_ENTRY: u64 = 1 << 48;

/// Returns true iff `[[a, b], [b, c]]` is entrywise nonnegative and
/// positive semidefinite.
pub fn is_dnn(a: i64, b: i64, c: i64) -> bool {
    a >= 0 && b >= 0 && c >= 0 && (a as i128) * (c as i128) >= (b as i128) * (b as i128)
}

/// A symmetric doubly nonnegative 2×2 integer matrix `[[a, b], [b, c]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Mat2 {
    a: u64,
    b: u64,
    c: u64,
}

impl Mat2 {
    /// Validates a signed triple, distinguishing negativity from a failed
    /// determinant test.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        for (idx, value) in [(0, a), (1, b), (2, c)] {
            if value < 0 {
                let (row, col) = [(1, 1), (1, 2), (2, 2)][idx];
                return Err(Error::Negative { row, col, value });
            }
        }
        Self::from_entries(a as u64, b as u64, c as u64)
    }

    pub fn from_entries(a: u64, b: u64, c: u64) -> Result<Self> {
        let ac = a as u128 * c as u128;
        let bb = b as u128 * b as u128;
        if ac < bb {
            return Err(Error::NotPsd {
                a,
                c,
                b_squared: bb,
            });
        }
        Ok(Mat2 { a, b, c })
    }

    pub(crate) const fn new_unchecked(a: u64, b: u64, c: u64) -> Self {
        Mat2 { a, b, c }
    }

    pub const fn zero() -> Self {
        Mat2 { a: 0, b: 0, c: 0 }
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    /// `a·c − b²`, nonnegative by construction.
    pub fn det(&self) -> u128 {
        self.a as u128 * self.c as u128 - self.b as u128 * self.b as u128
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    /// Ordinary matrix rank (0, 1 or 2).
    pub fn rank(&self) -> u32 {
        if self.is_zero() {
            0
        } else if self.det() == 0 {
            1
        } else {
            2
        }
    }

    /// The permutation-similar matrix `[[c, b], [b, a]]`.
    pub fn swapped(&self) -> Self {
        Mat2 {
            a: self.c,
            b: self.b,
            c: self.a,
        }
    }

    pub fn max_entry(&self) -> u64 {
        self.a.max(self.b).max(self.c)
    }

    pub(crate) fn ensure_in_range(&self) -> Result<()> {
        let value = self.max_entry();
        if value > MAX_ENTRY {
            return Err(Error::OutOfRange {
                value,
                max: MAX_ENTRY,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.b, self.c)
    }
}

/// A column of the nonnegative factor `V`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VecN(pub Vec<u64>);

impl VecN {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn scaled(&self, s: u64) -> Result<VecN> {
        self.0
            .iter()
            .map(|&x| x.checked_mul(s).ok_or(Error::Overflow("scaling a column")))
            .collect::<Result<Vec<_>>>()
            .map(VecN)
    }
}

impl From<[u64; 2]> for VecN {
    fn from(pair: [u64; 2]) -> Self {
        VecN(pair.to_vec())
    }
}

/// Where a factorization came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// `A = b·J + diag(a−b, c−b)`.
    Base,
    /// `A = diag(d₁, d₂) + β·J + (x, y)(x, y)ᵀ`.
    Template { x: u64, y: u64, beta: u64 },
    /// Exact branch-and-bound search.
    Oracle,
    /// Gcd-of-diagonal construction for rank-1 matrices.
    Rank1,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Base => f.write_str("base"),
            Method::Template { x, y, beta } => write!(f, "template:{x}:{y}:{beta}"),
            Method::Oracle => f.write_str("oracle"),
            Method::Rank1 => f.write_str("rank1"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Method::Base),
            "oracle" => Ok(Method::Oracle),
            "rank1" => Ok(Method::Rank1),
            _ => {
                let bad = || Error::Parse(format!("unknown method tag {s:?}"));
                let rest = s.strip_prefix("template:").ok_or_else(bad)?;
                let parts: Vec<u64> = rest
                    .split(':')
                    .map(|p| p.parse::<u64>().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                match parts[..] {
                    [x, y, beta] => Ok(Method::Template { x, y, beta }),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `A = V·Vᵀ` given as the columns of `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    columns: Vec<VecN>,
    method: Method,
}

impl Factorization {
    /// Builds a factorization, dropping zero columns.
    pub fn new(columns: Vec<VecN>, method: Method) -> Self {
        let columns = columns.into_iter().filter(|v| !v.is_zero()).collect();
        Factorization { columns, method }
    }

    pub fn from_pairs<I: IntoIterator<Item = [u64; 2]>>(pairs: I, method: Method) -> Self {
        Self::new(pairs.into_iter().map(VecN::from).collect(), method)
    }

    pub fn empty(method: Method) -> Self {
        Factorization {
            columns: Vec::new(),
            method,
        }
    }

    pub fn columns(&self) -> &[VecN] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Columns as 2-vectors. Panics if any column is not of length 2.
    pub(crate) fn pairs(&self) -> impl Iterator<Item = [u64; 2]> + '_ {
        self.columns.iter().map(|v| match v.entries() {
            [x, y] => [*x, *y],
            _ => panic!("expected 2-vector columns"),
        })
    }

    /// Compares two factorizations as multisets of columns.
    pub fn same_multiset(&self, other: &Factorization) -> bool {
        let mut lhs = self.columns.clone();
        let mut rhs = other.columns.clone();
        lhs.sort();
        rhs.sort();
        lhs == rhs
    }
}

/// A symmetric nonnegative integer matrix of arbitrary order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatN {
    n: usize,
    entries: Vec<u64>,
}

impl MatN {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &value) in row.iter().enumerate() {
                if value < 0 {
                    return Err(Error::Negative {
                        row: i + 1,
                        col: j + 1,
                        value,
                    });
                }
                if rows[j][i] != value {
                    return Err(Error::NotSymmetric {
                        i: i + 1,
                        j: j + 1,
                        upper: value,
                        lower: rows[j][i],
                    });
                }
                entries.push(value as u64);
            }
        }
        Ok(MatN { n, entries })
    }

    /// `d · v·vᵀ`.
    pub fn outer(d: u64, v: &[u64]) -> Result<Self> {
        let n = v.len();
        let mut entries = Vec::with_capacity(n * n);
        for &x in v {
            for &y in v {
                let e = x
                    .checked_mul(y)
                    .and_then(|p| p.checked_mul(d))
                    .ok_or(Error::Overflow("forming d·v·vᵀ"))?;
                entries.push(e);
            }
        }
        Ok(MatN { n, entries })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn diagonal(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n).map(move |i| self.get(i, i))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// The 2×2 view, if this matrix has order 2.
    pub fn to_mat2(&self) -> Option<Result<Mat2>> {
        (self.n == 2).then(|| Mat2::from_entries(self.get(0, 0), self.get(0, 1), self.get(1, 1)))
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries
            .chunks(self.n.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }
}

impl From<Mat2> for MatN {
    fn from(m: Mat2) -> Self {
        MatN {
            n: 2,
            entries: vec![m.a, m.b, m.b, m.c],
        }
    }
}

/// True iff `m` is zero or rank-1 positive semidefinite: `a_ij² = a_ii·a_jj`
/// for every pair. Nonnegativity of `MatN` fixes the sign of the
/// off-diagonal square roots.
pub fn is_rank1_dnn(m: &MatN) -> bool {
    rank1_violation(m).is_none()
}

pub(crate) fn rank1_violation(m: &MatN) -> Option<(usize, usize)> {
    for i in 0..m.n {
        for j in i + 1..m.n {
            let off = m.get(i, j) as u128;
            if off * off != m.get(i, i) as u128 * m.get(j, j) as u128 {
                return Some((i + 1, j + 1));
            }
        }
    }
    None
}

/// Read access shared by [`Mat2`] and [`MatN`].
pub trait SymmetricMatrix {
    fn order(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> u64;
}

impl SymmetricMatrix for Mat2 {
    fn order(&self) -> usize {
        2
    }

    fn entry(&self, i: usize, j: usize) -> u64 {
        match (i, j) {
            (0, 0) => self.a,
            (1, 1) => self.c,
            _ => self.b,
        }
    }
}

impl SymmetricMatrix for MatN {
    fn order(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize) -> u64 {
        self.get(i, j)
    }
}

/// Checks `Σ_k v_k·v_kᵀ = m` exactly. A column of the wrong length is an
/// error rather than a mismatch.
pub fn verify<M: SymmetricMatrix + ?Sized>(m: &M, f: &Factorization) -> Result<bool> {
    let n = m.order();
    for (column, v) in f.columns().iter().enumerate() {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                order: n,
                column,
                len: v.len(),
            });
        }
    }
    for i in 0..n {
        for j in i..n {
            let mut sum: u128 = 0;
            for v in f.columns() {
                let term = v.0[i] as u128 * v.0[j] as u128;
                sum = sum
                    .checked_add(term)
                    .ok_or(Error::Overflow("summing outer products"))?;
            }
            if sum != m.entry(i, j) as u128 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dnn_examples() {
        assert!(is_dnn(0, 0, 0));
        assert!(is_dnn(10, 7, 5));
        assert!(!is_dnn(1, 2, 1));
        assert!(!is_dnn(-1, 0, 0));
        assert!(!is_dnn(1, -1, 1));
    }

    #[test]
    fn constructor_distinguishes_failures() {
        assert!(matches!(
            Mat2::new(1, -2, 1),
            Err(Error::Negative {
                row: 1,
                col: 2,
                value: -2
            })
        ));
        let err = Mat2::new(1, 2, 1).unwrap_err();
        assert_eq!(err.to_string(), "not PSD: 1·1 < 4");
        assert_eq!(Mat2::new(10, 7, 5).unwrap().det(), 1);
    }

    #[test]
    fn rank1_examples() {
        let m = |rows: Vec<Vec<i64>>| MatN::new(rows).unwrap();
        assert!(is_rank1_dnn(&m(vec![vec![4, 6], vec![6, 9]])));
        assert!(!is_rank1_dnn(&m(vec![vec![1, 0], vec![0, 1]])));
        assert!(is_rank1_dnn(&m(vec![vec![0, 0], vec![0, 0]])));
    }

    #[test]
    fn matn_rejects_bad_input() {
        assert!(matches!(
            MatN::new(vec![vec![1, 2], vec![3, 4]]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            MatN::new(vec![vec![1, -1], vec![-1, 4]]),
            Err(Error::Negative { .. })
        ));
        assert!(matches!(
            MatN::new(vec![vec![1, 2], vec![2]]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn verify_examples() {
        let m = Mat2::new(2, 1, 2).unwrap();
        let f = Factorization::from_pairs([[1, 1], [1, 0], [0, 1]], Method::Base);
        assert!(verify(&m, &f).unwrap());

        let ones = Mat2::new(1, 1, 1).unwrap();
        assert!(verify(&ones, &Factorization::from_pairs([[1, 1]], Method::Base)).unwrap());
        assert!(!verify(
            &ones,
            &Factorization::from_pairs([[1, 0], [0, 1]], Method::Base)
        )
        .unwrap());
    }

    #[test]
    fn verify_dimension_mismatch_is_error() {
        let m = Mat2::new(1, 1, 1).unwrap();
        let f = Factorization::new(vec![VecN(vec![1, 1, 1])], Method::Oracle);
        assert!(matches!(
            verify(&m, &f),
            Err(Error::DimensionMismatch {
                order: 2,
                column: 0,
                len: 3
            })
        ));
    }

    #[test]
    fn zero_columns_are_stripped() {
        let f = Factorization::from_pairs([[0, 0], [1, 0], [0, 0]], Method::Base);
        assert_eq!(f.len(), 1);
        assert!(Factorization::empty(Method::Base).is_empty());
        assert!(verify(&Mat2::zero(), &Factorization::empty(Method::Base)).unwrap());
    }

    #[test]
    fn multiset_comparison_ignores_order() {
        let f = Factorization::from_pairs([[3, 2], [1, 1]], Method::Base);
        let g = Factorization::from_pairs([[1, 1], [3, 2]], Method::Oracle);
        let h = Factorization::from_pairs([[1, 1], [1, 1], [3, 2]], Method::Oracle);
        assert!(f.same_multiset(&g));
        assert!(!f.same_multiset(&h));
    }

    #[test]
    fn method_tags_round_trip() {
        for m in [
            Method::Base,
            Method::Oracle,
            Method::Rank1,
            Method::Template {
                x: 3,
                y: 2,
                beta: 17,
            },
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("template:1:2".parse::<Method>().is_err());
    }

    proptest! {
        #[test]
        fn dnn_symmetric_under_swap(a in -50i64..200, b in -50i64..200, c in -50i64..200) {
            prop_assert_eq!(is_dnn(a, b, c), is_dnn(c, b, a));
        }

        #[test]
        fn positive_b_forces_positive_diagonal(a in 0i64..500, b in 1i64..500, c in 0i64..500) {
            if is_dnn(a, b, c) {
                prop_assert!(a > 0 && c > 0);
            }
        }
    }
}
