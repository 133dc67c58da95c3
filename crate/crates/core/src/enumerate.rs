//! Lexicographic enumeration of fixed-size supports with deterministic
//! parallel reductions.
//!
//! Work is split by the first index of the support; each worker walks its
//! slice in lexicographic order. Reductions combine partial results in slice
//! order, so results never depend on the thread schedule.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default ceiling on support evaluations per call.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Zero-based position of `support` among size-`|support|` subsets of `[0, n)` in lexicographic order.
pub fn lex_rank(n: usize, support: &[usize]) -> u128 {
    let k = support.len();
    let mut rank = 0u128;
    let mut prev = 0usize;
    for (pos, &s) in support.iter().enumerate() {
        for skipped in prev..s {
            rank += binomial(n - skipped - 1, k - pos - 1);
        }
        prev = s + 1;
    }
    rank
}

/// Tracks evaluations against the ceiling, one whole size at a time.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    limit: u64,
    used: u128,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self { limit, used: 0 }
    }

    /// Reserves all `C(n, size)` supports of one size, or fails without reserving.
    pub fn charge_size(&mut self, n: usize, size: usize) -> Result<()> {
        let count = binomial(n, size);
        let total = self.used.saturating_add(count);
        if total > self.limit as u128 {
            return Err(Error::BudgetExceeded {
                n,
                size,
                count,
                total,
                budget: self.limit,
            });
        }
        self.used = total;
        Ok(())
    }

    /// Returns the unused part of the last reservation (early exit after a witness).
    pub fn refund(&mut self, amount: u128) {
        self.used -= amount;
    }

    pub fn used(&self) -> u64 {
        self.used as u64
    }
}

/// Visits every size-`k` subset of `[first+1, n)` prefixed by `first`, in lex order.
/// Stops early when `visit` returns `true`.
fn walk_with_first(n: usize, k: usize, first: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    debug_assert!(k >= 1 && first + k <= n);
    let mut idx: Vec<usize> = (first..first + k).collect();
    loop {
        if visit(&idx) {
            return;
        }
        // Advance positions 1..k (position 0 is pinned to `first`).
        let mut pos = k;
        loop {
            if pos <= 1 {
                return;
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                idx[pos] += 1;
                for q in pos + 1..k {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

fn first_indices(n: usize, k: usize) -> std::ops::Range<usize> {
    if k == 0 || k > n {
        0..0
    } else {
        0..n - k + 1
    }
}

/// Lexicographically first size-`k` support satisfying `pred`.
pub fn find_first<F>(n: usize, k: usize, pred: F) -> Option<Vec<usize>>
where
    F: Fn(&[usize]) -> bool + Sync,
{
    if k == 0 {
        return pred(&[]).then(Vec::new);
    }
    first_indices(n, k).into_par_iter().find_map_first(|first| {
        let mut hit = None;
        walk_with_first(n, k, first, |s| {
            if pred(s) {
                hit = Some(s.to_vec());
                true
            } else {
                false
            }
        });
        hit
    })
}

/// Every size-`k` support where `f` yields a value, in lexicographic order.
pub fn collect_all<R, F>(n: usize, k: usize, f: F) -> Vec<(Vec<usize>, R)>
where
    R: Send,
    F: Fn(&[usize]) -> Option<R> + Sync,
{
    if k == 0 {
        return f(&[]).map(|r| (Vec::new(), r)).into_iter().collect();
    }
    let chunks: Vec<Vec<(Vec<usize>, R)>> = first_indices(n, k)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            walk_with_first(n, k, first, |s| {
                if let Some(r) = f(s) {
                    out.push((s.to_vec(), r));
                }
                false
            });
            out
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Support maximising `score`; ties go to the lexicographically smaller support.
/// `None` only when there is no size-`k` support.
pub fn arg_max<S, F>(n: usize, k: usize, score: F) -> Option<(Vec<usize>, S)>
where
    S: PartialOrd + Copy + Send,
    F: Fn(&[usize]) -> S + Sync,
{
    if k == 0 {
        return Some((Vec::new(), score(&[])));
    }
    let better = |cur: &Option<(Vec<usize>, S)>, s: S| cur.as_ref().is_none_or(|(_, b)| s > *b);
    let partials: Vec<Option<(Vec<usize>, S)>> = first_indices(n, k)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(Vec<usize>, S)> = None;
            walk_with_first(n, k, first, |s| {
                let v = score(s);
                if better(&best, v) {
                    best = Some((s.to_vec(), v));
                }
                false
            });
            best
        })
        .collect();
    partials.into_iter().fold(None, |acc, p| match p {
        Some((s, v)) if better(&acc, v) => Some((s, v)),
        _ => acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(60, 4), 487_635);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(7, 0), 1);
    }

    #[test]
    fn enumerates_all_subsets_in_lex_order() {
        let seen = Mutex::new(Vec::new());
        let all = collect_all(6, 3, |s| {
            seen.lock().unwrap().push(s.to_vec());
            Some(())
        });
        assert_eq!(all.len(), 20);
        let supports: Vec<Vec<usize>> = all.into_iter().map(|(s, _)| s).collect();
        let mut sorted = supports.clone();
        sorted.sort();
        assert_eq!(supports, sorted);
        for (r, s) in supports.iter().enumerate() {
            assert_eq!(lex_rank(6, s), r as u128);
        }
    }

    #[test]
    fn find_first_is_lexicographic() {
        let hit = find_first(10, 2, |s| s[0] + s[1] == 9 && s[0] >= 2);
        assert_eq!(hit, Some(vec![2, 7]));
        assert_eq!(find_first(4, 5, |_| true), None);
        assert_eq!(find_first(4, 0, |_| true), Some(vec![]));
    }

    #[test]
    fn arg_max_breaks_ties_lexicographically() {
        let (s, v) = arg_max(5, 2, |s| if s.contains(&3) { 1.0 } else { 0.0 }).unwrap();
        assert_eq!((s, v), (vec![0, 3], 1.0));
    }

    #[test]
    fn budget_reports_offending_size() {
        let mut b = Budget::new(100);
        b.charge_size(10, 2).unwrap();
        let err = b.charge_size(10, 3).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { size: 3, count: 120, .. }));
        assert_eq!(b.used(), 45);
    }
}
