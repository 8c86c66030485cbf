//! Closed-form guarantees for weighted majority under optimal delegation,
//! and exact optimizers for committee quality objectives.

mod optimize;
mod sweeps;

pub use optimize::{brute_force_committee, greedy_coverage, CommitteeObjective, CommitteeOptimum};
pub use sweeps::{chernoff_sweep, coverage_sweep, parity_sweep, threshold_sweep, SweepReport};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::delegation::{column_mass, WeightMatrix};
use crate::error::{FrdError, Result};
use crate::model::Committee;

fn big(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn ratio(n: i128, d: i128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Head counts and per-side delegator counts for a single issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IssueScenario {
    pub n: usize,
    pub n1: usize,
    pub k: usize,
    pub k1: usize,
    pub lambda1: usize,
    pub lambda0: usize,
}

impl IssueScenario {
    pub fn new(n: usize, n1: usize, k: usize, k1: usize, lambda1: usize, lambda0: usize) -> Result<Self> {
        if n == 0 || k == 0 || n1 > n || 2 * n1 < n || k1 > k {
            return Err(FrdError::Precondition(format!(
                "invalid scenario N={n} N1={n1} k={k} k1={k1}"
            )));
        }
        if lambda1 > n1 || lambda0 > n - n1 {
            return Err(FrdError::Precondition(format!(
                "delegator counts ({lambda1}, {lambda0}) exceed side sizes ({n1}, {})",
                n - n1
            )));
        }
        Ok(Self {
            n,
            n1,
            k,
            k1,
            lambda1,
            lambda0,
        })
    }

    pub fn n0(&self) -> usize {
        self.n - self.n1
    }
}

/// `X1` when `lambda1` majority and `lambda0` minority voters delegate
/// optimally and everyone else keeps the default. Delegators whose side has
/// no member stay on the default.
pub fn x1_closed_form(s: &IssueScenario) -> BigRational {
    let l1 = if s.k1 > 0 { s.lambda1 } else { 0 };
    let l0 = if s.k1 < s.k { s.lambda0 } else { 0 };
    let default_share = ratio(((s.n - l0 - l1) * s.k1) as i128, s.k as i128);
    default_share + big(l1)
}

fn check_full_coverage(k: usize, k1: usize) -> Result<()> {
    if k1 == 0 || k1 >= k {
        return Err(FrdError::Precondition(format!(
            "threshold needs 0 < k1 < k, got k1={k1}, k={k}"
        )));
    }
    Ok(())
}

/// Majority delegators needed so that the majority wins whatever the
/// minority does: the majority wins for every `lambda0` iff `lambda1` exceeds
/// this value. It may be negative.
pub fn majority_guarantee_threshold(n: usize, n1: usize, k: usize, k1: usize) -> Result<BigRational> {
    check_full_coverage(k, k1)?;
    let num = (n * k) as i128 - 2 * (n1 * k1) as i128;
    Ok(ratio(num, 2 * (k - k1) as i128))
}

/// The minority wins iff `lambda0` exceeds this value.
pub fn minority_overturn_threshold(n: usize, lambda1: usize, k: usize, k1: usize) -> Result<BigRational> {
    check_full_coverage(k, k1)?;
    if lambda1 > n {
        return Err(FrdError::Precondition(format!("lambda1={lambda1} exceeds N={n}")));
    }
    let (n, l1, k, k1) = (n as i128, lambda1 as i128, k as i128, k1 as i128);
    Ok(ratio(k * l1 + (n - l1) * (2 * k1 - k), 2 * k1))
}

/// Voters delegating independently, each with its own probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticScenario {
    pub k: usize,
    pub k1: usize,
    pub p: Vec<Ratio<u64>>,
    pub majority: Vec<bool>,
}

impl ProbabilisticScenario {
    pub fn new(k: usize, k1: usize, p: Vec<Ratio<u64>>, majority: Vec<bool>) -> Result<Self> {
        let n = p.len();
        if n == 0 || n.is_multiple_of(2) || k.is_multiple_of(2) || k1 > k {
            return Err(FrdError::Precondition(format!(
                "need odd N and k with k1 <= k, got N={n} k={k} k1={k1}"
            )));
        }
        if majority.len() != n {
            return Err(FrdError::DimensionMismatch {
                what: "majority mask",
                expected: n,
                found: majority.len(),
            });
        }
        if let Some(bad) = p.iter().find(|x| *x.numer() > *x.denom()) {
            return Err(FrdError::InvalidProbability(bad.to_f64().unwrap_or(f64::NAN)));
        }
        if 2 * majority.iter().filter(|&&b| b).count() <= n {
            return Err(FrdError::Precondition(
                "majority side must hold more than half the voters".into(),
            ));
        }
        Ok(Self { k, k1, p, majority })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    /// One realization of `X1`.
    pub fn sample_x1<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        let (mut l1, mut l0) = (0, 0);
        for (p, &maj) in self.p.iter().zip(&self.majority) {
            if rng.random_ratio(*p.numer() as u32, *p.denom() as u32) {
                if maj {
                    l1 += 1;
                } else {
                    l0 += 1;
                }
            }
        }
        let n1 = self.majority.iter().filter(|&&b| b).count();
        x1_closed_form(&IssueScenario {
            n: self.n(),
            n1,
            k: self.k,
            k1: self.k1,
            lambda1: l1,
            lambda0: l0,
        })
    }
}

/// `E[X1]`.
pub fn expected_mass(s: &ProbabilisticScenario) -> BigRational {
    let share = ratio(s.k1 as i128, s.k as i128);
    let one = big(1);
    s.p.iter()
        .zip(&s.majority)
        .map(|(p, &maj)| {
            let p = ratio(*p.numer() as i128, *p.denom() as i128);
            let stay = (&one - &p) * &share;
            match (maj, s.k1 > 0, s.k1 < s.k) {
                (true, true, _) => p + stay,
                (true, false, _) => BigRational::zero(),
                (false, _, true) => stay,
                (false, _, false) => one.clone(),
            }
        })
        .sum()
}

/// `1 - exp(-(2μ - N)² / 4N)`, a lower bound on the probability that the
/// majority wins. Requires `μ > N/2`.
pub fn chernoff_lower_bound(mu: &BigRational, n: usize) -> Result<f64> {
    let gap = mu * big(2) - big(n);
    if !gap.is_positive() {
        return Err(FrdError::Precondition(format!(
            "bound is vacuous unless mu > N/2 (mu = {mu}, N = {n})"
        )));
    }
    let gap = gap.to_f64().unwrap_or(f64::INFINITY);
    Ok(1.0 - (-(gap * gap) / (4.0 * n as f64)).exp())
}

/// `k·X1` and `k·X0`, integers of different parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityWitness {
    pub k_x1: BigInt,
    pub k_x0: BigInt,
}

/// Checks that `X1 != N/2` on `issue` and returns the parity witness. Only
/// meaningful for odd `N`, odd `k` and single-member or default allocations.
pub fn parity_no_tie(w: &WeightMatrix, committee: &Committee, issue: usize) -> Result<ParityWitness> {
    let (n, k) = (w.n_voters(), w.k());
    if n % 2 == 0 || k % 2 == 0 {
        return Err(FrdError::Precondition(format!(
            "parity argument needs odd N and k, got N={n} k={k}"
        )));
    }
    let (x1, x0) = column_mass(w, committee, issue)?;
    let k_x1 = &x1 * big(k);
    let k_x0 = &x0 * big(k);
    if !k_x1.is_integer() || !k_x0.is_integer() {
        return Err(FrdError::Precondition(format!("k*X1 = {k_x1} is not an integer")));
    }
    let (k_x1, k_x0) = (k_x1.to_integer(), k_x0.to_integer());
    if (&k_x1 % 2u32) == (&k_x0 % 2u32) {
        return Err(FrdError::Precondition(format!("tie: k*X1 = {k_x1}, k*X0 = {k_x0}")));
    }
    Ok(ParityWitness { k_x1, k_x0 })
}
