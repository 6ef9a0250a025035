//! Exact integer cp-rank of 2×2 matrices by iterative-deepening depth-first
//! search over nonnegative integer columns.
//!
//! Columns are generated in non-increasing lexicographic order, so each
//! multiset of columns is visited once. A partial remainder `A − Σ v·vᵀ` of
//! any factorization is itself completely positive, hence doubly nonnegative;
//! for a fixed first coordinate `x` that condition confines `y` to an
//! interval, which is where most of the pruning comes from.

use serde::Serialize;

use crate::cp2;
use crate::error::{Error, Result};
use crate::exact_matrix::{Factorization, Mat2, MatN, Method};
use crate::rank1::rank1_cp_rank;
use crate::squares::{decompose, min_square_count};

pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const DEFAULT_MAX_DIAG: u64 = 512;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Node limit across all deepening rounds.
    pub budget: u64,
    /// Largest diagonal entry accepted.
    pub max_diag: u64,
    /// Restrict candidates to columns leaving a doubly nonnegative remainder.
    pub dnn_prune: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            budget: DEFAULT_BUDGET,
            max_diag: DEFAULT_MAX_DIAG,
            dnn_prune: true,
        }
    }
}

impl OracleConfig {
    pub fn with_budget(budget: u64) -> Self {
        OracleConfig {
            budget,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RankMethod {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub rank: u32,
    pub certificate: Factorization,
    pub method: RankMethod,
    pub nodes_explored: u64,
}

/// The template bound from [`cp2::factor`], reported as an upper bound.
pub fn upper_bound_report(m: &Mat2) -> Result<RankReport> {
    let certificate = cp2::factor(m)?;
    Ok(RankReport {
        rank: certificate.len() as u32,
        certificate,
        method: RankMethod::UpperBound,
        nodes_explored: 0,
    })
}

/// Exact integer cp-rank with the default caps and the given node budget.
pub fn exact_cp_rank(m: &Mat2, budget: u64) -> Result<RankReport> {
    exact_cp_rank_with(m, &OracleConfig::with_budget(budget))
}

pub fn exact_cp_rank_with(m: &Mat2, cfg: &OracleConfig) -> Result<RankReport> {
    for value in [m.a(), m.c()] {
        if value > cfg.max_diag {
            return Err(Error::OutOfRange {
                value,
                max: cfg.max_diag,
            });
        }
    }
    let upper = cp2::factor(m)?;
    let upper_rank = upper.len() as u32;
    let rem = Rem {
        a: m.a(),
        b: m.b(),
        c: m.c(),
    };
    let mut search = Search {
        nodes: 0,
        budget: cfg.budget,
        dnn_prune: cfg.dnn_prune,
        path: Vec::new(),
    };
    let first = rem.lower_bound().max(m.rank());
    for depth in first..upper_rank {
        search.path.clear();
        match search.dfs(rem, depth, [u64::MAX, u64::MAX]) {
            Ok(true) => {
                let certificate = Factorization::from_pairs(search.path.drain(..), Method::Oracle);
                return Ok(RankReport {
                    rank: certificate.len() as u32,
                    certificate,
                    method: RankMethod::Exact,
                    nodes_explored: search.nodes,
                });
            }
            Ok(false) => {}
            Err(Exhausted) => {
                return Err(Error::Inconclusive {
                    lower: depth,
                    upper: upper_rank,
                    nodes: search.nodes,
                });
            }
        }
    }
    // Nothing shorter exists, so the template factorization is optimal.
    Ok(RankReport {
        rank: upper_rank,
        certificate: upper,
        method: RankMethod::Exact,
        nodes_explored: search.nodes,
    })
}

/// Differential check of the rank-1 formula against the search on
/// `d·v·vᵀ`.
pub fn exact_matches_formula_rank1(d: u64, v: [u64; 2], cfg: &OracleConfig) -> Result<bool> {
    let m = MatN::outer(d, &v)?;
    let formula = rank1_cp_rank(&m)?;
    let mat = m.to_mat2().expect("order 2")?;
    let report = exact_cp_rank_with(&mat, cfg)?;
    Ok(report.rank == formula)
}

#[derive(Clone, Copy, Debug)]
struct Rem {
    a: u64,
    b: u64,
    c: u64,
}

impl Rem {
    fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    fn is_psd(&self) -> bool {
        self.a as u128 * self.c as u128 >= self.b as u128 * self.b as u128
    }

    fn minus(&self, [x, y]: [u64; 2]) -> Option<Rem> {
        Some(Rem {
            a: self.a.checked_sub(x * x)?,
            b: self.b.checked_sub(x * y)?,
            c: self.c.checked_sub(y * y)?,
        })
    }

    /// Admissible bound on the columns still needed. With `b = 0` every
    /// column is supported on one coordinate and the bound is exact.
    fn lower_bound(&self) -> u32 {
        if self.b == 0 {
            min_square_count(self.a) as u32 + min_square_count(self.c) as u32
        } else {
            1
        }
    }

    /// Closed range of `y` with `x² ≤ a` for which the remainder after
    /// `(x, y)` stays positive semidefinite: `a·y² − 2bx·y + x²c − det ≤ 0`.
    fn psd_y_range(&self, x: u64) -> Option<(u64, u64)> {
        if self.a == 0 {
            // b = 0 here, and x must be 0.
            return Some((0, self.c.isqrt()));
        }
        let det = self.a as u128 * self.c as u128 - self.b as u128 * self.b as u128;
        let slack = det.checked_mul((self.a - x * x) as u128)?;
        let root = slack.isqrt() as i128;
        let center = self.b as i128 * x as i128;
        let a = self.a as i128;
        let hi = (center + root).div_euclid(a);
        let lo = -(root - center).div_euclid(a);
        if hi < 0 || hi < lo {
            return Some((1, 0));
        }
        Some((lo.max(0) as u64, hi as u64))
    }
}

struct Exhausted;

struct Search {
    nodes: u64,
    budget: u64,
    dnn_prune: bool,
    path: Vec<[u64; 2]>,
}

impl Search {
    /// Completes `path` with at most `depth` further columns, each at most
    /// `last` lexicographically.
    fn dfs(
        &mut self,
        rem: Rem,
        depth: u32,
        last: [u64; 2],
    ) -> std::result::Result<bool, Exhausted> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Exhausted);
        }
        if rem.is_zero() {
            return Ok(true);
        }
        if depth == 0 || rem.lower_bound() > depth {
            return Ok(false);
        }
        let x_cap = rem.a.isqrt().min(last[0]);
        if rem.b == 0 {
            // Only one-coordinate columns remain and the bound is exact.
            // Order within the completion does not matter for the result.
            self.path
                .extend(decompose(rem.a).parts.into_iter().map(|s| [s, 0]));
            self.path
                .extend(decompose(rem.c).parts.into_iter().map(|s| [0, s]));
            return Ok(true);
        }
        // Every remaining column has x ≤ x_cap and y ≤ √c.
        let max_mixed = x_cap as u128 * rem.c.isqrt() as u128;
        if (depth as u128) * max_mixed < rem.b as u128 {
            return Ok(false);
        }
        for x in (0..=x_cap).rev() {
            let mut y_hi = rem.c.isqrt();
            let mut y_lo = 0;
            if let Some(q) = rem.b.checked_div(x) {
                y_hi = y_hi.min(q);
            }
            if x == last[0] {
                y_hi = y_hi.min(last[1]);
            }
            if self.dnn_prune {
                // On overflow fall back to the box; children are still checked.
                if let Some((lo, hi)) = rem.psd_y_range(x) {
                    y_lo = lo;
                    y_hi = y_hi.min(hi);
                }
            }
            if y_hi < y_lo {
                continue;
            }
            for y in (y_lo..=y_hi).rev() {
                if x == 0 && y == 0 {
                    continue;
                }
                let Some(child) = rem.minus([x, y]) else {
                    continue;
                };
                if self.dnn_prune && !child.is_psd() {
                    continue;
                }
                self.path.push([x, y]);
                if self.dfs(child, depth - 1, [x, y])? {
                    return Ok(true);
                }
                self.path.pop();
            }
        }
        Ok(false)
    }
}
