//! Exact Chamberlin-Courant and k-Median by enumerating every `k`-subset.
//!
//! Both rules represent each voter by their best-ranked committee member.
//! CC maximizes the Borda utility `Σ_j (m - rank)`; k-Median minimizes the
//! rank sum `Σ_j rank`. Ties among optimal committees are broken uniformly
//! by reservoir sampling over the enumeration.

use rand::Rng;

use super::check_k;
use crate::ballots::OrdinalBallots;
use crate::error::{FrdError, Result};

/// Largest number of committees the exhaustive rules will enumerate.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

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

/// Chamberlin-Courant with Borda utility.
pub fn chamberlin_courant<R: Rng + ?Sized>(ballots: &OrdinalBallots, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let m = ballots.n_candidates() as i64;
    best_committee(ballots, k, rng, |rank| m - rank as i64)
}

/// k-Median over ranks: minimize the summed rank of each voter's best member.
pub fn k_median<R: Rng + ?Sized>(ballots: &OrdinalBallots, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    best_committee(ballots, k, rng, |rank| -(rank as i64))
}

struct Search<'a, R: ?Sized, U> {
    /// rank_of[c * n + j]
    rank_of: Vec<u32>,
    n: usize,
    m: usize,
    k: usize,
    utility: U,
    /// best_rank[depth * n + j] for the partial committee of that depth
    best_rank: Vec<u32>,
    chosen: Vec<usize>,
    best: Option<(i64, Vec<usize>)>,
    optimal_seen: u64,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized, U: Fn(u32) -> i64> Search<'_, R, U> {
    fn descend(&mut self, start: usize, depth: usize) {
        if depth == self.k {
            let row = &self.best_rank[depth * self.n..(depth + 1) * self.n];
            let total: i64 = row.iter().map(|&r| (self.utility)(r)).sum();
            match &self.best {
                Some((best, _)) if total < *best => {}
                Some((best, _)) if total == *best => {
                    self.optimal_seen += 1;
                    if self.rng.random_range(0..self.optimal_seen) == 0 {
                        self.best = Some((total, self.chosen.clone()));
                    }
                }
                _ => {
                    self.optimal_seen = 1;
                    self.best = Some((total, self.chosen.clone()));
                }
            }
            return;
        }
        let n = self.n;
        // Leave room for the remaining members.
        for c in start..=self.m - (self.k - depth) {
            let (before, after) = self.best_rank.split_at_mut((depth + 1) * n);
            let prev = &before[depth * n..];
            let next = &mut after[..n];
            let ranks = &self.rank_of[c * n..(c + 1) * n];
            for ((out, &p), &r) in next.iter_mut().zip(prev).zip(ranks) {
                *out = p.min(r);
            }
            self.chosen.push(c);
            self.descend(c + 1, depth + 1);
            self.chosen.pop();
        }
    }
}

fn best_committee<R, U>(ballots: &OrdinalBallots, k: usize, rng: &mut R, utility: U) -> Result<Vec<usize>>
where
    R: Rng + ?Sized,
    U: Fn(u32) -> i64,
{
    let (n, m) = (ballots.n_voters(), ballots.n_candidates());
    check_k(k, m)?;
    let count = binomial(m, k);
    if count > ENUMERATION_LIMIT {
        return Err(FrdError::EnumerationTooLarge {
            m,
            k,
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut rank_of = vec![0u32; m * n];
    for j in 0..n {
        for (c, &r) in ballots.ranks(j).iter().enumerate() {
            rank_of[c * n + j] = r;
        }
    }
    let mut best_rank = vec![0u32; (k + 1) * n];
    best_rank[..n].fill(u32::MAX);
    let mut search = Search {
        rank_of,
        n,
        m,
        k,
        utility,
        best_rank,
        chosen: Vec::with_capacity(k),
        best: None,
        optimal_seen: 0,
        rng,
    };
    search.descend(0, 0);
    Ok(search.best.expect("at least one committee").1)
}
