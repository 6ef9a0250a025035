//! Integer cp-factorization of 2×2 doubly nonnegative matrices with at most
//! 11 columns.
//!
//! The pipeline first shrinks the off-diagonal entry by unimodular
//! congruences `A ↦ S·A·Sᵀ` with `S = [[1, −α], [0, 1]]` (or its transpose),
//! Euclid-style, until `b ≤ min(a, c)`. The inverse of each `S` is
//! nonnegative, so any factorization of the reduced matrix maps back to one of
//! the original with the same number of columns.
//!
//! A reduced matrix is then split as
//! `diag(d₁, d₂) + β·J + (x, y)(x, y)ᵀ` with `β + x·y = b`, and every piece is
//! realized through minimal sums of squares. `x = y = 0` is the plain
//! `b·J + diag(a − b, c − b)` split (at most 12 columns); a small search over
//! `x, y ≤ 6` contains the shifted splits that bring the bound to 11.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_matrix::{Factorization, Mat2, Method};
use crate::squares::{decompose, is_form_4r8k7, min_square_count};

/// Largest `x`, `y` tried by the template search.
pub const TEMPLATE_SEARCH_LIMIT: u64 = 6;

/// Column-count guarantee of [`factor`].
pub const COLUMN_BOUND: u32 = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    /// `b` reduced against `c`: `a ← a − 2αb + α²c`, `b ← b − αc`.
    Upper,
    /// `b` reduced against `a`: `c ← c − 2αb + α²a`, `b ← b − αa`.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReduceStep {
    pub side: Side,
    pub alpha: u64,
}

impl ReduceStep {
    /// Applies the inverse congruence to one column.
    fn lift(&self, [x, y]: [u64; 2]) -> Result<[u64; 2]> {
        let overflow = Error::Overflow("replaying a reduction step");
        match self.side {
            Side::Upper => {
                let x = self
                    .alpha
                    .checked_mul(y)
                    .and_then(|t| t.checked_add(x))
                    .ok_or(overflow)?;
                Ok([x, y])
            }
            Side::Lower => {
                let y = self
                    .alpha
                    .checked_mul(x)
                    .and_then(|t| t.checked_add(y))
                    .ok_or(overflow)?;
                Ok([x, y])
            }
        }
    }
}

/// The steps taken by [`reduce`], in application order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TransformLog {
    steps: Vec<ReduceStep>,
}

impl TransformLog {
    pub fn steps(&self) -> &[ReduceStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Maps a factorization of the reduced matrix to one of the original.
    pub fn replay(&self, f: &Factorization) -> Result<Factorization> {
        let lifted = f
            .pairs()
            .map(|col| {
                self.steps
                    .iter()
                    .rev()
                    .try_fold(col, |col, step| step.lift(col))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Factorization::from_pairs(lifted, f.method()))
    }
}

/// Reduces `m` by unimodular congruence until `b ≤ min(a, c)`.
///
/// Each step reduces `b` modulo the smaller diagonal entry (against `c` on
/// ties), so `b` strictly decreases and the determinant is unchanged.
pub fn reduce(m: Mat2) -> (Mat2, TransformLog) {
    let (mut a, mut b, mut c) = (m.a(), m.b(), m.c());
    let mut log = TransformLog::default();
    while b > a.min(c) {
        // b > min(a, c) ≥ 0 and a·c ≥ b² force both diagonal entries positive.
        if c <= a {
            let alpha = b / c;
            let rem = b % c;
            // a − 2αb + α²c = a − α(b + rem), nonnegative by the determinant.
            a = (a as u128 - alpha as u128 * (b as u128 + rem as u128)) as u64;
            b = rem;
            log.steps.push(ReduceStep {
                side: Side::Upper,
                alpha,
            });
        } else {
            let alpha = b / a;
            let rem = b % a;
            c = (c as u128 - alpha as u128 * (b as u128 + rem as u128)) as u64;
            b = rem;
            log.steps.push(ReduceStep {
                side: Side::Lower,
                alpha,
            });
        }
    }
    (Mat2::new_unchecked(a, b, c), log)
}

fn ensure_reduced(m: &Mat2) -> Result<()> {
    let min_diag = m.a().min(m.c());
    if m.b() > min_diag {
        return Err(Error::NotReduced { b: m.b(), min_diag });
    }
    Ok(())
}

/// The split `A = diag(d₁, d₂) + β·J + (x, y)(x, y)ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Template {
    pub x: u64,
    pub y: u64,
    pub beta: u64,
    d1: u64,
    d2: u64,
    /// Columns used when every piece is realized with minimal square counts.
    pub columns_bound: u32,
}

impl Template {
    /// The split with mixed column `(x, y)`, if all of `β`, `d₁`, `d₂` are
    /// nonnegative.
    pub fn new(m: &Mat2, x: u64, y: u64) -> Option<Template> {
        let beta = m.b().checked_sub(x.checked_mul(y)?)?;
        let d1 = m.a().checked_sub(beta)?.checked_sub(x.checked_mul(x)?)?;
        let d2 = m.c().checked_sub(beta)?.checked_sub(y.checked_mul(y)?)?;
        let columns_bound = min_square_count(d1) as u32
            + min_square_count(d2) as u32
            + min_square_count(beta) as u32
            + u32::from(x != 0 || y != 0);
        Some(Template {
            x,
            y,
            beta,
            d1,
            d2,
            columns_bound,
        })
    }

    pub fn d1(&self) -> u64 {
        self.d1
    }

    pub fn d2(&self) -> u64 {
        self.d2
    }

    pub fn method(&self) -> Method {
        if self.x == 0 && self.y == 0 {
            Method::Base
        } else {
            Method::Template {
                x: self.x,
                y: self.y,
                beta: self.beta,
            }
        }
    }

    /// Columns `(s, s)` for `β`, then `(x, y)`, then `(s, 0)` for `d₁` and
    /// `(0, s)` for `d₂`.
    pub fn realize(&self) -> Factorization {
        let shared = decompose(self.beta).parts.into_iter().map(|s| [s, s]);
        let mixed = std::iter::once([self.x, self.y]);
        let first = decompose(self.d1).parts.into_iter().map(|s| [s, 0]);
        let second = decompose(self.d2).parts.into_iter().map(|s| [0, s]);
        Factorization::from_pairs(
            shared.chain(mixed).chain(first).chain(second),
            self.method(),
        )
    }

    fn rank_key(&self) -> (u32, u64, u64, u64) {
        (self.columns_bound, self.x, self.y, self.beta)
    }
}

/// `b·J + diag(a − b, 0) + diag(0, c − b)` for a reduced matrix.
pub fn base_template(m: &Mat2) -> Result<Factorization> {
    ensure_reduced(m)?;
    Ok(Template::new(m, 0, 0)
        .expect("reduced matrices admit the base split")
        .realize())
}

/// The shifted splits that beat the base split when `b`, `a − b` and `c − b`
/// all need four squares.
///
/// * `a − b ≢ 7 (mod 8)`: `(x, y, β) = (3, 2, b − 6)`.
/// * `c − b ≢ 7 (mod 8)`: `(2, 3, b − 6)`.
/// * both `≡ 7`: `(1, 2, b − 2)` with `d₁ = a − b + 1`, `d₂ = c − b − 2`.
///
/// Returns an empty list when the base split already needs at most 11
/// columns.
pub fn theorem_templates(m: &Mat2) -> Result<Vec<Template>> {
    ensure_reduced(m)?;
    let (a, b, c) = (m.a(), m.b(), m.c());
    if !(is_form_4r8k7(b) && is_form_4r8k7(a - b) && is_form_4r8k7(c - b)) {
        return Ok(Vec::new());
    }
    let top_seven = (a - b) % 8 == 7;
    let bottom_seven = (c - b) % 8 == 7;
    let mut out = Vec::new();
    if !top_seven {
        out.extend(Template::new(m, 3, 2));
    }
    if !bottom_seven {
        out.extend(Template::new(m, 2, 3));
    }
    if top_seven && bottom_seven {
        out.extend(Template::new(m, 1, 2));
    }
    Ok(out)
}

/// Every feasible split with `x, y ≤ TEMPLATE_SEARCH_LIMIT`.
pub fn candidate_templates(m: &Mat2) -> Vec<Template> {
    (0..=TEMPLATE_SEARCH_LIMIT)
        .flat_map(|x| (0..=TEMPLATE_SEARCH_LIMIT).map(move |y| (x, y)))
        .filter_map(|(x, y)| Template::new(m, x, y))
        .collect()
}

/// The cheapest split of a reduced matrix; ties go to the smallest
/// `(x, y, β)`.
pub fn best_template(m: &Mat2) -> Result<Template> {
    let guaranteed = theorem_templates(m)?;
    let best = candidate_templates(m)
        .into_iter()
        .chain(guaranteed)
        .min_by_key(Template::rank_key)
        .expect("the base split is always a candidate");
    Ok(best)
}

/// An integer cp-factorization of `m` with at most 11 columns.
pub fn factor(m: &Mat2) -> Result<Factorization> {
    m.ensure_in_range()?;
    let (reduced, log) = reduce(*m);
    let f = best_template(&reduced)?.realize();
    let f = log.replay(&f)?;
    debug_assert!(crate::exact_matrix::verify(m, &f).unwrap_or(false));
    Ok(f)
}

/// Column count of [`factor`]: an upper bound on the integer cp-rank.
pub fn cp_rank_upper(m: &Mat2) -> Result<u32> {
    m.ensure_in_range()?;
    let (reduced, _) = reduce(*m);
    Ok(best_template(&reduced)?.columns_bound)
}
