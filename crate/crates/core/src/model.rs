//! Shared domain types: issue profiles, outcome vectors, committees, the
//! agreement metric and committee quality statistics.

use num_rational::Ratio;
use rand::Rng;

use crate::error::{FrdError, Result};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Binary agent × issue preference matrix, packed one bit per entry.
///
/// The same type holds voter and candidate profiles.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IssueProfile {
    n_agents: usize,
    n_issues: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for IssueProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut list = f.debug_list();
        for agent in 0..self.n_agents {
            let row: String = (0..self.n_issues)
                .map(|i| if self.get(agent, i) { '1' } else { '0' })
                .collect();
            list.entry(&row);
        }
        list.finish()
    }
}

impl IssueProfile {
    /// Builds a profile from `f(agent, issue)`.
    pub fn from_fn(n_agents: usize, n_issues: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if n_agents == 0 || n_issues == 0 {
            return Err(FrdError::EmptyProfile);
        }
        let words_per_row = words_for(n_issues);
        let mut bits = vec![0u64; n_agents * words_per_row];
        for agent in 0..n_agents {
            for issue in 0..n_issues {
                if f(agent, issue) {
                    bits[agent * words_per_row + issue / WORD] |= 1 << (issue % WORD);
                }
            }
        }
        Ok(Self {
            n_agents,
            n_issues,
            words_per_row,
            bits,
        })
    }

    /// Builds a profile from rows of 0/1 entries.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n_issues = rows.first().map_or(0, |r| r.as_ref().len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_issues {
                return Err(FrdError::DimensionMismatch {
                    what: "profile row length",
                    expected: n_issues,
                    found: row.len(),
                });
            }
            if let Some(&bad) = row.iter().find(|&&v| v > 1) {
                return Err(FrdError::Precondition(format!(
                    "profile entries must be 0 or 1, found {bad}"
                )));
            }
        }
        Self::from_fn(rows.len(), n_issues, |a, i| rows[a].as_ref()[i] == 1)
    }

    /// Builds a profile by drawing every entry from a fair coin.
    pub fn random<R: Rng + ?Sized>(n_agents: usize, n_issues: usize, rng: &mut R) -> Result<Self> {
        let mut profile = Self::from_fn(n_agents, n_issues, |_, _| false)?;
        let tail = n_issues % WORD;
        for agent in 0..n_agents {
            let row = profile.row_words_mut(agent);
            for word in row.iter_mut() {
                *word = rng.random();
            }
            if tail != 0 {
                *row.last_mut().unwrap() &= (1u64 << tail) - 1;
            }
        }
        Ok(profile)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_issues(&self) -> usize {
        self.n_issues
    }

    #[inline]
    pub fn get(&self, agent: usize, issue: usize) -> bool {
        debug_assert!(agent < self.n_agents && issue < self.n_issues);
        (self.bits[agent * self.words_per_row + issue / WORD] >> (issue % WORD)) & 1 == 1
    }

    pub fn set(&mut self, agent: usize, issue: usize, value: bool) {
        let word = &mut self.bits[agent * self.words_per_row + issue / WORD];
        if value {
            *word |= 1 << (issue % WORD);
        } else {
            *word &= !(1 << (issue % WORD));
        }
    }

    #[inline]
    pub fn row_words(&self, agent: usize) -> &[u64] {
        &self.bits[agent * self.words_per_row..(agent + 1) * self.words_per_row]
    }

    fn row_words_mut(&mut self, agent: usize) -> &mut [u64] {
        &mut self.bits[agent * self.words_per_row..(agent + 1) * self.words_per_row]
    }

    /// The preferences of one agent as a boolean vector.
    pub fn row(&self, agent: usize) -> Vec<bool> {
        (0..self.n_issues).map(|i| self.get(agent, i)).collect()
    }

    /// Number of agents preferring 1 on each issue.
    pub fn column_ones(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_issues];
        for agent in 0..self.n_agents {
            for (w, &word) in self.row_words(agent).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    counts[w * WORD + b] += 1;
                    bits &= bits - 1;
                }
            }
        }
        counts
    }

    /// Number of issues on which `self[agent]` and `other[other_agent]` agree.
    #[inline]
    pub fn matches(&self, agent: usize, other: &IssueProfile, other_agent: usize) -> usize {
        debug_assert_eq!(self.n_issues, other.n_issues);
        let differ: u32 = self
            .row_words(agent)
            .iter()
            .zip(other.row_words(other_agent))
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        self.n_issues - differ as usize
    }

    /// Exact agreement between two rows (possibly of different profiles).
    pub fn row_agreement(&self, agent: usize, other: &IssueProfile, other_agent: usize) -> Result<Ratio<u64>> {
        check_same_issues(self, other)?;
        Ok(Ratio::new(
            self.matches(agent, other, other_agent) as u64,
            self.n_issues as u64,
        ))
    }

    /// Copy with the issues selected by `mask` relabeled (0 ↔ 1).
    pub fn flipped(&self, mask: &FlipMask) -> Result<Self> {
        if mask.len() != self.n_issues {
            return Err(FrdError::DimensionMismatch {
                what: "flip mask length",
                expected: self.n_issues,
                found: mask.len(),
            });
        }
        let mut out = self.clone();
        for agent in 0..self.n_agents {
            for (word, m) in out.row_words_mut(agent).iter_mut().zip(&mask.words) {
                *word ^= m;
            }
        }
        Ok(out)
    }

    /// Sub-profile holding the given agents, in the given order.
    pub fn select_agents(&self, agents: &[usize]) -> Result<Self> {
        if agents.is_empty() {
            return Err(FrdError::EmptyProfile);
        }
        let mut bits = Vec::with_capacity(agents.len() * self.words_per_row);
        for &a in agents {
            if a >= self.n_agents {
                return Err(FrdError::InvalidMembers { m: self.n_agents });
            }
            bits.extend_from_slice(self.row_words(a));
        }
        Ok(Self {
            n_agents: agents.len(),
            n_issues: self.n_issues,
            words_per_row: self.words_per_row,
            bits,
        })
    }
}

pub(crate) fn check_same_issues(a: &IssueProfile, b: &IssueProfile) -> Result<()> {
    if a.n_issues() != b.n_issues() {
        return Err(FrdError::DimensionMismatch {
            what: "issue count",
            expected: a.n_issues(),
            found: b.n_issues(),
        });
    }
    Ok(())
}

/// Per-issue relabeling applied by [`canonicalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipMask {
    len: usize,
    words: Vec<u64>,
}

impl FlipMask {
    pub fn none(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_flipped(&self, issue: usize) -> bool {
        (self.words[issue / WORD] >> (issue % WORD)) & 1 == 1
    }

    fn flip(&mut self, issue: usize) {
        self.words[issue / WORD] |= 1 << (issue % WORD);
    }
}

/// A voter profile relabeled so the voter majority prefers 1 on every issue.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub profile: IssueProfile,
    pub flips: FlipMask,
}

/// Relabels every issue so the (weak) voter majority is 1.
///
/// Exactly tied issues are relabeled with probability 1/2. Apply the returned
/// mask to any companion candidate profile with [`IssueProfile::flipped`].
pub fn canonicalize<R: Rng + ?Sized>(profile: &IssueProfile, rng: &mut R) -> Canonical {
    let n = profile.n_agents();
    let mut flips = FlipMask::none(profile.n_issues());
    for (issue, &ones) in profile.column_ones().iter().enumerate() {
        let zeros = n - ones;
        if zeros > ones || (zeros == ones && rng.random_bool(0.5)) {
            flips.flip(issue);
        }
    }
    let profile = profile.flipped(&flips).expect("mask built for this profile");
    Canonical { profile, flips }
}

/// Exact agreement `1 - (1/r) Σ|a_i - b_i|` between two binary vectors.
pub fn agreement(a: &[bool], b: &[bool]) -> Result<Ratio<u64>> {
    if a.len() != b.len() {
        return Err(FrdError::DimensionMismatch {
            what: "vector length",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(FrdError::Precondition("agreement needs at least one issue".into()));
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(Ratio::new(same as u64, a.len() as u64))
}

/// Decisions on every issue, with the issues that needed a tie-break marked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeVector {
    pub decisions: Vec<bool>,
    pub tie_flags: Vec<bool>,
}

impl OutcomeVector {
    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn tie_count(&self) -> usize {
        self.tie_flags.iter().filter(|&&t| t).count()
    }

    /// Number of issues decided in favour of 1.
    pub fn ones(&self) -> usize {
        self.decisions.iter().filter(|&&d| d).count()
    }

    pub fn agreement(&self, other: &OutcomeVector) -> Result<Ratio<u64>> {
        agreement(&self.decisions, &other.decisions)
    }
}

/// An elected committee of odd size `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Committee {
    members: Vec<usize>,
    member_prefs: IssueProfile,
    ones: Vec<usize>,
}

impl Committee {
    /// Seats `members` (indices into `candidates`), in the given order.
    pub fn new(candidates: &IssueProfile, members: Vec<usize>) -> Result<Self> {
        let k = members.len();
        if k == 0 || k.is_multiple_of(2) {
            return Err(FrdError::InvalidCommitteeSize(k));
        }
        if k > candidates.n_agents() {
            return Err(FrdError::CommitteeTooLarge {
                k,
                m: candidates.n_agents(),
            });
        }
        let mut seen = vec![false; candidates.n_agents()];
        for &c in &members {
            if c >= candidates.n_agents() || seen[c] {
                return Err(FrdError::InvalidMembers {
                    m: candidates.n_agents(),
                });
            }
            seen[c] = true;
        }
        let member_prefs = candidates.select_agents(&members)?;
        let ones = member_prefs.column_ones();
        Ok(Self {
            members,
            member_prefs,
            ones,
        })
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn member_prefs(&self) -> &IssueProfile {
        &self.member_prefs
    }

    pub fn n_issues(&self) -> usize {
        self.member_prefs.n_issues()
    }

    /// Number of members preferring 1 on `issue`.
    #[inline]
    pub fn k1(&self, issue: usize) -> usize {
        self.ones[issue]
    }

    /// Preference of the member seated at `position` on `issue`.
    #[inline]
    pub fn prefers(&self, position: usize, issue: usize) -> bool {
        self.member_prefs.get(position, issue)
    }

    /// Members sorted by candidate index.
    pub fn sorted_members(&self) -> Vec<usize> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }
}

/// Head counts for one issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IssueTally {
    pub k1: usize,
    pub k0: usize,
    pub n1: usize,
    pub n0: usize,
}

impl IssueTally {
    pub fn covered(&self) -> bool {
        self.k1 > 0
    }

    pub fn fully_covered(&self) -> bool {
        self.k1 > 0 && self.k0 > 0
    }

    pub fn majority_agrees(&self) -> bool {
        self.k1 > self.k0
    }
}

/// Per-issue tallies of a committee against a canonical voter profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitteeStats {
    pub tallies: Vec<IssueTally>,
}

impl CommitteeStats {
    pub fn covered(&self) -> usize {
        self.tallies.iter().filter(|t| t.covered()).count()
    }

    pub fn fully_covered(&self) -> usize {
        self.tallies.iter().filter(|t| t.fully_covered()).count()
    }

    pub fn majority_agrees(&self) -> usize {
        self.tallies.iter().filter(|t| t.majority_agrees()).count()
    }

    pub fn coverage_fraction(&self) -> Ratio<u64> {
        Ratio::new(self.covered() as u64, self.tallies.len() as u64)
    }

    pub fn full_coverage_fraction(&self) -> Ratio<u64> {
        Ratio::new(self.fully_covered() as u64, self.tallies.len() as u64)
    }

    pub fn majority_agreement_fraction(&self) -> Ratio<u64> {
        Ratio::new(self.majority_agrees() as u64, self.tallies.len() as u64)
    }
}

/// Coverage, full coverage and majority agreement of `committee` on every issue.
///
/// `voters` is expected to be canonical, so the voter majority side is 1.
pub fn committee_stats(voters: &IssueProfile, committee: &Committee) -> Result<CommitteeStats> {
    check_same_issues(voters, committee.member_prefs())?;
    let n = voters.n_agents();
    let k = committee.k();
    let tallies = voters
        .column_ones()
        .into_iter()
        .enumerate()
        .map(|(issue, n1)| {
            let k1 = committee.k1(issue);
            IssueTally {
                k1,
                k0: k - k1,
                n1,
                n0: n - n1,
            }
        })
        .collect();
    Ok(CommitteeStats { tallies })
}
