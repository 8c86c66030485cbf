use serde::{Deserialize, Serialize};

use crate::election::{binomial, ENUMERATION_LIMIT};
use crate::error::{FrdError, Result};
use crate::model::IssueProfile;

/// Committee quality measured against the all-ones (canonical majority) target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommitteeObjective {
    /// Issues where at least one member prefers 1.
    Coverage,
    /// Issues where the committee is not unanimous.
    FullCoverage,
    /// Issues where a strict majority of members prefers 1.
    MajorityAgreement,
}

impl CommitteeObjective {
    fn counts(self, ones: u32, k: u32) -> bool {
        match self {
            CommitteeObjective::Coverage => ones > 0,
            CommitteeObjective::FullCoverage => ones > 0 && ones < k,
            CommitteeObjective::MajorityAgreement => 2 * ones > k,
        }
    }
}

/// A set of candidate indices, ascending, and its objective value in issues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitteeOptimum {
    pub members: Vec<usize>,
    pub value: usize,
}

fn check_size(candidates: &IssueProfile, k: usize) -> Result<()> {
    let m = candidates.n_agents();
    if k == 0 {
        return Err(FrdError::InvalidCommitteeSize(k));
    }
    if k > m {
        return Err(FrdError::CommitteeTooLarge { k, m });
    }
    Ok(())
}

/// Exact optimum over all `k`-subsets. The first optimal subset in
/// lexicographic order wins.
pub fn brute_force_committee(
    candidates: &IssueProfile,
    k: usize,
    objective: CommitteeObjective,
) -> Result<CommitteeOptimum> {
    check_size(candidates, k)?;
    let (m, r) = (candidates.n_agents(), candidates.n_issues());
    let count = binomial(m, k);
    if count > ENUMERATION_LIMIT {
        return Err(FrdError::EnumerationTooLarge {
            m,
            k,
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let rows: Vec<Vec<bool>> = (0..m).map(|c| candidates.row(c)).collect();
    // ones[depth * r + i]: members preferring 1 on issue i among the first `depth` chosen
    let mut ones = vec![0u32; (k + 1) * r];
    let mut chosen = Vec::with_capacity(k);
    let mut best: Option<CommitteeOptimum> = None;
    fn descend(
        start: usize,
        depth: usize,
        ctx: (&[Vec<bool>], usize, usize, usize, CommitteeObjective),
        ones: &mut [u32],
        chosen: &mut Vec<usize>,
        best: &mut Option<CommitteeOptimum>,
    ) {
        let (rows, m, k, r, objective) = ctx;
        if depth == k {
            let tally = &ones[depth * r..(depth + 1) * r];
            let value = tally.iter().filter(|&&o| objective.counts(o, k as u32)).count();
            if best.as_ref().is_none_or(|b| value > b.value) {
                *best = Some(CommitteeOptimum {
                    members: chosen.clone(),
                    value,
                });
            }
            return;
        }
        for (c, row) in rows.iter().enumerate().take(m - (k - depth) + 1).skip(start) {
            let (before, after) = ones.split_at_mut((depth + 1) * r);
            for ((out, &prev), &bit) in after[..r].iter_mut().zip(&before[depth * r..]).zip(row) {
                *out = prev + bit as u32;
            }
            chosen.push(c);
            descend(c + 1, depth + 1, ctx, ones, chosen, best);
            chosen.pop();
        }
    }
    descend(0, 0, (&rows, m, k, r, objective), &mut ones, &mut chosen, &mut best);
    Ok(best.expect("k <= m leaves at least one subset"))
}

/// Greedy max coverage: `k` rounds, each adding the candidate that covers the
/// most uncovered issues, lowest index on ties.
pub fn greedy_coverage(candidates: &IssueProfile, k: usize) -> Result<CommitteeOptimum> {
    check_size(candidates, k)?;
    let m = candidates.n_agents();
    let words = candidates.row_words(0).len();
    let mut covered = vec![0u64; words];
    let mut members = Vec::with_capacity(k);
    for _ in 0..k {
        let gain = |c: usize| -> u32 {
            candidates
                .row_words(c)
                .iter()
                .zip(&covered)
                .map(|(w, cov)| (w & !cov).count_ones())
                .sum()
        };
        let pick = (0..m)
            .filter(|c| !members.contains(c))
            .fold(None::<(usize, u32)>, |acc, c| {
                let g = gain(c);
                match acc {
                    Some((_, best)) if best >= g => acc,
                    _ => Some((c, g)),
                }
            })
            .expect("k <= m")
            .0;
        for (cov, w) in covered.iter_mut().zip(candidates.row_words(pick)) {
            *cov |= w;
        }
        members.push(pick);
    }
    let value = covered.iter().map(|w| w.count_ones() as usize).sum();
    members.sort_unstable();
    Ok(CommitteeOptimum { members, value })
}
