//! Electoral ballots induced by voter/candidate issue agreement.
//!
//! A voter approves a candidate when they agree on strictly more than half
//! the issues, ranks candidates by agreement (ties broken by one private
//! random permutation per voter), and reports cardinal weights proportional
//! to agreement.

use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{FrdError, Result};
use crate::model::{check_same_issues, IssueProfile};

/// Number of agreeing issues for every voter/candidate pair.
#[derive(Debug, Clone)]
pub struct AgreementTable {
    n_voters: usize,
    n_candidates: usize,
    n_issues: usize,
    matches: Vec<u32>,
}

impl AgreementTable {
    pub fn new(voters: &IssueProfile, candidates: &IssueProfile) -> Result<Self> {
        check_same_issues(voters, candidates)?;
        let (n, m) = (voters.n_agents(), candidates.n_agents());
        let mut matches = Vec::with_capacity(n * m);
        for j in 0..n {
            for l in 0..m {
                matches.push(voters.matches(j, candidates, l) as u32);
            }
        }
        Ok(Self {
            n_voters: n,
            n_candidates: m,
            n_issues: voters.n_issues(),
            matches,
        })
    }

    pub fn n_voters(&self) -> usize {
        self.n_voters
    }

    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    pub fn n_issues(&self) -> usize {
        self.n_issues
    }

    #[inline]
    pub fn matches(&self, voter: usize, candidate: usize) -> u32 {
        self.matches[voter * self.n_candidates + candidate]
    }

    pub fn row(&self, voter: usize) -> &[u32] {
        &self.matches[voter * self.n_candidates..(voter + 1) * self.n_candidates]
    }

    pub fn agreement(&self, voter: usize, candidate: usize) -> Ratio<u64> {
        Ratio::new(self.matches(voter, candidate) as u64, self.n_issues as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallotForm {
    Approval,
    Ordinal,
    Cardinal,
}

impl BallotForm {
    pub fn name(self) -> &'static str {
        match self {
            BallotForm::Approval => "approval",
            BallotForm::Ordinal => "ordinal",
            BallotForm::Cardinal => "cardinal",
        }
    }
}

impl fmt::Display for BallotForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Voter × candidate approval matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApprovalBallots {
    n_voters: usize,
    n_candidates: usize,
    approves: Vec<bool>,
}

impl ApprovalBallots {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self> {
        let (n, m) = rectangular(&rows)?;
        Ok(Self {
            n_voters: n,
            n_candidates: m,
            approves: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_table(table: &AgreementTable) -> Self {
        let r = table.n_issues as u32;
        Self {
            n_voters: table.n_voters,
            n_candidates: table.n_candidates,
            approves: table.matches.iter().map(|&a| 2 * a > r).collect(),
        }
    }

    pub fn n_voters(&self) -> usize {
        self.n_voters
    }

    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    #[inline]
    pub fn approves(&self, voter: usize, candidate: usize) -> bool {
        self.approves[voter * self.n_candidates + candidate]
    }

    pub fn row(&self, voter: usize) -> &[bool] {
        &self.approves[voter * self.n_candidates..(voter + 1) * self.n_candidates]
    }

    /// Number of approvals each candidate receives.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_candidates];
        for j in 0..self.n_voters {
            for (c, &a) in self.row(j).iter().enumerate() {
                counts[c] += a as u64;
            }
        }
        counts
    }
}

/// Total orders over candidates, stored both as ranks (1 = best) and as
/// candidate lists best-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalBallots {
    n_voters: usize,
    n_candidates: usize,
    ranks: Vec<u32>,
    orders: Vec<u32>,
}

impl OrdinalBallots {
    /// Builds ballots from best-first candidate lists.
    pub fn from_orders(orders: Vec<Vec<usize>>) -> Result<Self> {
        let (n, m) = rectangular(&orders)?;
        let mut ranks = vec![0u32; n * m];
        for (j, order) in orders.iter().enumerate() {
            for (pos, &c) in order.iter().enumerate() {
                if c >= m || ranks[j * m + c] != 0 {
                    return Err(FrdError::Precondition(format!(
                        "ballot {j} is not a permutation of 0..{m}"
                    )));
                }
                ranks[j * m + c] = pos as u32 + 1;
            }
        }
        let orders = orders.into_iter().flatten().map(|c| c as u32).collect();
        Ok(Self {
            n_voters: n,
            n_candidates: m,
            ranks,
            orders,
        })
    }

    /// Builds ballots from rank rows (rank 1 = best).
    pub fn from_ranks(ranks: Vec<Vec<u32>>) -> Result<Self> {
        let (_, m) = rectangular(&ranks)?;
        let mut orders = Vec::with_capacity(ranks.len());
        for (j, row) in ranks.iter().enumerate() {
            let mut order = vec![usize::MAX; m];
            for (c, &rank) in row.iter().enumerate() {
                let pos = rank as usize;
                if pos == 0 || pos > m || order[pos - 1] != usize::MAX {
                    return Err(FrdError::Precondition(format!(
                        "rank row {j} is not a permutation of 1..={m}"
                    )));
                }
                order[pos - 1] = c;
            }
            orders.push(order);
        }
        Self::from_orders(orders)
    }

    /// Sorts each voter's candidates by agreement, breaking ties with one
    /// private uniform permutation per voter.
    pub fn from_table<R: Rng + ?Sized>(table: &AgreementTable, rng: &mut R) -> Self {
        let (n, m) = (table.n_voters, table.n_candidates);
        let mut ranks = vec![0u32; n * m];
        let mut orders = Vec::with_capacity(n * m);
        let mut order: Vec<u32> = (0..m as u32).collect();
        for j in 0..n {
            let row = table.row(j);
            order.shuffle(rng);
            order.sort_by(|&a, &b| row[b as usize].cmp(&row[a as usize]));
            for (pos, &c) in order.iter().enumerate() {
                ranks[j * m + c as usize] = pos as u32 + 1;
            }
            orders.extend_from_slice(&order);
        }
        Self {
            n_voters: n,
            n_candidates: m,
            ranks,
            orders,
        }
    }

    pub fn n_voters(&self) -> usize {
        self.n_voters
    }

    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    #[inline]
    pub fn rank(&self, voter: usize, candidate: usize) -> u32 {
        self.ranks[voter * self.n_candidates + candidate]
    }

    pub fn ranks(&self, voter: usize) -> &[u32] {
        &self.ranks[voter * self.n_candidates..(voter + 1) * self.n_candidates]
    }

    /// Candidates of `voter`, best first.
    pub fn order(&self, voter: usize) -> &[u32] {
        &self.orders[voter * self.n_candidates..(voter + 1) * self.n_candidates]
    }
}

/// Normalized cardinal weights; every row sums to exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalBallots {
    n_voters: usize,
    n_candidates: usize,
    weights: Vec<Ratio<u64>>,
    approx: Vec<f64>,
}

impl CardinalBallots {
    pub fn new(rows: Vec<Vec<Ratio<u64>>>) -> Result<Self> {
        let (n, m) = rectangular(&rows)?;
        for (j, row) in rows.iter().enumerate() {
            let total = row.iter().fold(Ratio::from_integer(0u64), |acc, w| acc + w);
            if total != Ratio::from_integer(1) {
                return Err(FrdError::Precondition(format!(
                    "cardinal row {j} sums to {total}, not 1"
                )));
            }
        }
        let weights: Vec<Ratio<u64>> = rows.into_iter().flatten().collect();
        let approx = weights.iter().map(ratio_f64).collect();
        Ok(Self {
            n_voters: n,
            n_candidates: m,
            weights,
            approx,
        })
    }

    /// `w(j, l) = L(v_j, c_l) / Σ_h L(v_j, c_h)`, uniform when the voter
    /// agrees with no candidate on any issue.
    pub fn from_table(table: &AgreementTable) -> Self {
        let (n, m) = (table.n_voters, table.n_candidates);
        let mut weights = Vec::with_capacity(n * m);
        for j in 0..n {
            let row = table.row(j);
            let total: u64 = row.iter().map(|&a| a as u64).sum();
            if total == 0 {
                weights.extend((0..m).map(|_| Ratio::new(1, m as u64)));
            } else {
                weights.extend(row.iter().map(|&a| Ratio::new(a as u64, total)));
            }
        }
        let approx = weights.iter().map(ratio_f64).collect();
        Self {
            n_voters: n,
            n_candidates: m,
            weights,
            approx,
        }
    }

    pub fn n_voters(&self) -> usize {
        self.n_voters
    }

    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    #[inline]
    pub fn weight(&self, voter: usize, candidate: usize) -> Ratio<u64> {
        self.weights[voter * self.n_candidates + candidate]
    }

    #[inline]
    pub(crate) fn approx(&self, voter: usize, candidate: usize) -> f64 {
        self.approx[voter * self.n_candidates + candidate]
    }

    pub fn row(&self, voter: usize) -> &[Ratio<u64>] {
        &self.weights[voter * self.n_candidates..(voter + 1) * self.n_candidates]
    }
}

fn ratio_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn rectangular<T>(rows: &[Vec<T>]) -> Result<(usize, usize)> {
    let m = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || m == 0 {
        return Err(FrdError::EmptyProfile);
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(FrdError::DimensionMismatch {
            what: "ballot row length",
            expected: m,
            found: bad.len(),
        });
    }
    Ok((rows.len(), m))
}

/// Voters' preferences over candidates in one of the three forms.
#[derive(Debug, Clone, PartialEq)]
pub enum ElectoralBallots {
    Approval(ApprovalBallots),
    Ordinal(OrdinalBallots),
    Cardinal(CardinalBallots),
}

impl ElectoralBallots {
    pub fn form(&self) -> BallotForm {
        match self {
            ElectoralBallots::Approval(_) => BallotForm::Approval,
            ElectoralBallots::Ordinal(_) => BallotForm::Ordinal,
            ElectoralBallots::Cardinal(_) => BallotForm::Cardinal,
        }
    }

    pub fn n_voters(&self) -> usize {
        match self {
            ElectoralBallots::Approval(b) => b.n_voters(),
            ElectoralBallots::Ordinal(b) => b.n_voters(),
            ElectoralBallots::Cardinal(b) => b.n_voters(),
        }
    }

    pub fn n_candidates(&self) -> usize {
        match self {
            ElectoralBallots::Approval(b) => b.n_candidates(),
            ElectoralBallots::Ordinal(b) => b.n_candidates(),
            ElectoralBallots::Cardinal(b) => b.n_candidates(),
        }
    }
}

pub fn derive_approvals(voters: &IssueProfile, candidates: &IssueProfile) -> Result<ElectoralBallots> {
    let table = AgreementTable::new(voters, candidates)?;
    Ok(ElectoralBallots::Approval(ApprovalBallots::from_table(&table)))
}

pub fn derive_ordering<R: Rng + ?Sized>(
    voters: &IssueProfile,
    candidates: &IssueProfile,
    rng: &mut R,
) -> Result<ElectoralBallots> {
    let table = AgreementTable::new(voters, candidates)?;
    Ok(ElectoralBallots::Ordinal(OrdinalBallots::from_table(&table, rng)))
}

pub fn derive_weights(voters: &IssueProfile, candidates: &IssueProfile) -> Result<ElectoralBallots> {
    let table = AgreementTable::new(voters, candidates)?;
    Ok(ElectoralBallots::Cardinal(CardinalBallots::from_table(&table)))
}
