//! Issue-by-issue decisions under direct, representative and flexible
//! representative democracy.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use std::cmp::Ordering;

use crate::delegation::{column_mass, WeightMatrix};
use crate::error::{FrdError, Result};
use crate::model::{Committee, IssueProfile, OutcomeVector};

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub outcome: OutcomeVector,
    /// Mass behind outcome 1 on each issue; only set for weighted decisions.
    pub x1: Option<Vec<BigRational>>,
    pub tie_count: usize,
}

impl DecisionRecord {
    fn new(decisions: Vec<bool>, tie_flags: Vec<bool>, x1: Option<Vec<BigRational>>) -> Self {
        let tie_count = tie_flags.iter().filter(|&&t| t).count();
        Self {
            outcome: OutcomeVector { decisions, tie_flags },
            x1,
            tie_count,
        }
    }
}

/// Majority of `yes` against `total`, a fair coin on an exact tie.
fn majority<R: Rng + ?Sized>(yes_twice: Ordering, rng: &mut R) -> (bool, bool) {
    match yes_twice {
        Ordering::Greater => (true, false),
        Ordering::Less => (false, false),
        Ordering::Equal => (rng.random_bool(0.5), true),
    }
}

/// Simple majority of all voters on every issue.
pub fn dd_outcome<R: Rng + ?Sized>(voters: &IssueProfile, rng: &mut R) -> DecisionRecord {
    let n = voters.n_agents();
    let (decisions, ties) = voters
        .column_ones()
        .into_iter()
        .map(|ones| majority((2 * ones).cmp(&n), rng))
        .unzip();
    DecisionRecord::new(decisions, ties, None)
}

/// Majority of the committee members on every issue. Committees have odd
/// size, so no issue ties.
pub fn rd_outcome(committee: &Committee) -> DecisionRecord {
    let k = committee.k();
    let decisions = (0..committee.n_issues()).map(|i| 2 * committee.k1(i) > k).collect();
    DecisionRecord::new(decisions, vec![false; committee.n_issues()], None)
}

/// Weighted majority: outcome 1 iff `x1 > n / 2`, a fair coin on equality.
pub fn weighted_majority<R: Rng + ?Sized>(x1: &BigRational, n_voters: usize, rng: &mut R) -> (bool, bool) {
    let twice = x1 * BigRational::from_integer(BigInt::from(2));
    majority(twice.cmp(&BigRational::from_integer(BigInt::from(n_voters))), rng)
}

/// Decides each issue from its mass `x1`.
pub fn frd_from_masses<R: Rng + ?Sized>(x1: Vec<BigRational>, n_voters: usize, rng: &mut R) -> DecisionRecord {
    let (decisions, ties) = x1.iter().map(|x| weighted_majority(x, n_voters, rng)).unzip();
    DecisionRecord::new(decisions, ties, Some(x1))
}

/// Weighted majority over one allocation matrix per issue.
pub fn frd_outcome<R: Rng + ?Sized>(
    committee: &Committee,
    matrices: &[WeightMatrix],
    rng: &mut R,
) -> Result<DecisionRecord> {
    if matrices.len() != committee.n_issues() {
        return Err(FrdError::DimensionMismatch {
            what: "weight matrices",
            expected: committee.n_issues(),
            found: matrices.len(),
        });
    }
    let n = matrices.first().map_or(0, WeightMatrix::n_voters);
    if let Some(w) = matrices.iter().find(|w| w.n_voters() != n) {
        return Err(FrdError::DimensionMismatch {
            what: "voter count",
            expected: n,
            found: w.n_voters(),
        });
    }
    let x1 = matrices
        .iter()
        .enumerate()
        .map(|(i, w)| column_mass(w, committee, i).map(|(x1, _)| x1))
        .collect::<Result<Vec<_>>>()?;
    Ok(frd_from_masses(x1, n, rng))
}
