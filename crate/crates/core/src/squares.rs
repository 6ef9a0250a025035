//! Sums of squares: the `4^r(8k+7)` classifier, minimal square counts and
//! canonical minimal decompositions.

use serde::{Deserialize, Serialize};

/// A representation `target = Σ parts[i]²` with parts sorted non-increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDecomp {
    pub target: u64,
    pub parts: Vec<u64>,
    pub minimal: bool,
}

impl SquareDecomp {
    pub fn count(&self) -> usize {
        self.parts.len()
    }
}

/// Exact integer square root when `x` is a perfect square.
pub fn exact_sqrt(x: u64) -> Option<u64> {
    let s = x.isqrt();
    (s * s == x).then_some(s)
}

/// True iff `x = 4^r·(8k+7)` for some `r, k ≥ 0`. False for zero.
pub fn is_form_4r8k7(x: u64) -> bool {
    if x == 0 {
        return false;
    }
    let mut n = x;
    while n.is_multiple_of(4) {
        n /= 4;
    }
    n % 8 == 7
}

/// Two-square theorem: every prime `≡ 3 (mod 4)` divides `x` to an even power.
pub fn is_sum_of_two_squares(x: u64) -> bool {
    if x == 0 {
        return true;
    }
    let mut n = x >> x.trailing_zeros();
    // An odd part ≡ 3 (mod 4) always carries such a prime to an odd power.
    if n % 4 == 3 {
        return false;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if p % 4 == 3 && e % 2 == 1 {
                return false;
            }
        }
        p += 2;
    }
    n % 4 != 3
}

/// Least number of positive squares summing to `x` (0 for `x = 0`).
pub fn min_square_count(x: u64) -> u8 {
    if x == 0 {
        0
    } else if exact_sqrt(x).is_some() {
        1
    } else if is_sum_of_two_squares(x) {
        2
    } else if is_form_4r8k7(x) {
        4
    } else {
        3
    }
}

/// The lexicographically greatest minimal representation of `x`.
pub fn decompose(x: u64) -> SquareDecomp {
    let count = min_square_count(x) as usize;
    let parts = search(x, count, x.isqrt())
        .expect("min_square_count admits a representation of that length");
    SquareDecomp {
        target: x,
        parts,
        minimal: true,
    }
}

/// Exactly `k` positive parts, each at most `cap`, largest first.
fn search(x: u64, k: usize, cap: u64) -> Option<Vec<u64>> {
    match k {
        0 => return (x == 0).then(Vec::new),
        1 => {
            return exact_sqrt(x)
                .filter(|&s| s > 0 && s <= cap)
                .map(|s| vec![s]);
        }
        _ if x == 0 => return None,
        _ => {}
    }
    let hi = x.isqrt().min(cap);
    // The largest of k parts satisfies k·s² ≥ x.
    let mut lo = (x / k as u64).isqrt();
    while (lo as u128 * lo as u128) * (k as u128) < x as u128 {
        lo += 1;
    }
    for s in (lo.max(1)..=hi).rev() {
        let rem = x - s * s;
        if rem == 0 || min_square_count(rem) as usize > k - 1 {
            continue;
        }
        if let Some(mut rest) = search(rem, k - 1, s) {
            rest.insert(0, s);
            return Some(rest);
        }
    }
    None
}

/// If `x` has form `4^r(8k+7)`, none of `x ± 2`, `x ± 6` (when nonnegative)
/// has that form. Vacuously true otherwise.
pub fn neighbor_excluded(x: u64) -> bool {
    if !is_form_4r8k7(x) {
        return true;
    }
    let below = [2u64, 6].into_iter().filter_map(|d| x.checked_sub(d));
    let above = [2u64, 6].into_iter().filter_map(|d| x.checked_add(d));
    !below.chain(above).any(is_form_4r8k7)
}
