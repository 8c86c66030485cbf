//! Per-issue allocation of voting power from voters to representatives.
//!
//! Every voter holds one divisible vote per issue. By default it is split
//! evenly over the `k` members; a delegating voter reallocates it according
//! to a [`SchemeKind`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ballots::ElectoralBallots;
use crate::error::{FrdError, Result};
use crate::model::{check_same_issues, Committee, IssueProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// Nobody delegates: plain representative democracy.
    None,
    /// Per issue, the whole vote goes to one member sharing the voter's view.
    Optimal,
    /// Fixed even split over the approved members.
    Approve,
    /// Fixed vote for the single most preferred member.
    Best1,
    /// Fixed even split over the three most preferred members.
    Best3,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::None,
        SchemeKind::Optimal,
        SchemeKind::Approve,
        SchemeKind::Best1,
        SchemeKind::Best3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::None => "none",
            SchemeKind::Optimal => "optimal",
            SchemeKind::Approve => "approve",
            SchemeKind::Best1 => "best1",
            SchemeKind::Best3 => "best3",
        }
    }

    /// Number of top members a best-`m` scheme splits over.
    pub fn best_count(self) -> Option<usize> {
        match self {
            SchemeKind::Best1 => Some(1),
            SchemeKind::Best3 => Some(3),
            _ => None,
        }
    }

    pub fn id(self) -> u64 {
        Self::ALL.iter().position(|&s| s == self).unwrap() as u64
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = FrdError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| FrdError::InvalidSpec(format!("unknown delegation scheme {s:?}")))
    }
}

/// A scheme together with its delegation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelegationScheme {
    kind: SchemeKind,
    alpha: f64,
}

impl DelegationScheme {
    pub fn new(kind: SchemeKind, alpha: f64) -> Result<Self> {
        check_probability(alpha)?;
        Ok(Self { kind, alpha })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(FrdError::InvalidProbability(p));
    }
    Ok(())
}

/// How the delegation rate turns into a set of delegators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelegatorSampling {
    /// Each voter delegates independently with probability α.
    #[default]
    Bernoulli,
    /// Exactly ⌊αN⌋ voters, chosen uniformly, delegate.
    ExactCount,
}

/// One uniform draw per voter. Thresholding the same draw at different rates
/// gives nested delegator sets.
#[derive(Debug, Clone)]
pub struct DelegationDraw {
    uniforms: Vec<f64>,
}

impl DelegationDraw {
    pub fn new<R: Rng + ?Sized>(n_voters: usize, rng: &mut R) -> Self {
        Self {
            uniforms: (0..n_voters).map(|_| rng.random::<f64>()).collect(),
        }
    }

    pub fn n_voters(&self) -> usize {
        self.uniforms.len()
    }

    pub fn delegators(&self, alpha: f64, sampling: DelegatorSampling) -> Result<Vec<bool>> {
        check_probability(alpha)?;
        Ok(match sampling {
            DelegatorSampling::Bernoulli => self.uniforms.iter().map(|&u| u < alpha).collect(),
            DelegatorSampling::ExactCount => {
                let n = self.uniforms.len();
                let count = ((alpha * n as f64) + 1e-9).floor() as usize;
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| self.uniforms[a].total_cmp(&self.uniforms[b]).then(a.cmp(&b)));
                let mut out = vec![false; n];
                for &j in &idx[..count.min(n)] {
                    out[j] = true;
                }
                out
            }
        })
    }

    /// Bernoulli delegators with separate rates for voters on each side of
    /// the issue (`side[j]` true for the majority).
    pub fn delegators_by_side(&self, side: &[bool], alpha_majority: f64, alpha_minority: f64) -> Result<Vec<bool>> {
        check_probability(alpha_majority)?;
        check_probability(alpha_minority)?;
        if side.len() != self.uniforms.len() {
            return Err(FrdError::DimensionMismatch {
                what: "voter count",
                expected: self.uniforms.len(),
                found: side.len(),
            });
        }
        Ok(self
            .uniforms
            .iter()
            .zip(side)
            .map(|(&u, &maj)| u < if maj { alpha_majority } else { alpha_minority })
            .collect())
    }
}

/// Marks each voter as a delegator independently with probability `alpha`.
pub fn select_delegators<R: Rng + ?Sized>(n_voters: usize, alpha: f64, rng: &mut R) -> Result<Vec<bool>> {
    select_delegators_with(n_voters, alpha, DelegatorSampling::Bernoulli, rng)
}

pub fn select_delegators_with<R: Rng + ?Sized>(
    n_voters: usize,
    alpha: f64,
    sampling: DelegatorSampling,
    rng: &mut R,
) -> Result<Vec<bool>> {
    check_probability(alpha)?;
    DelegationDraw::new(n_voters, rng).delegators(alpha, sampling)
}

/// How one voter's unit of voting power is spread over the committee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Allocation {
    /// `1/k` to every member.
    Default,
    /// An even split over these committee positions.
    Even(Arc<[usize]>),
}

/// One issue's voter × member allocation of voting power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    k: usize,
    rows: Vec<Allocation>,
}

impl WeightMatrix {
    /// Every voter on the uniform default.
    pub fn default_matrix(n_voters: usize, k: usize) -> Result<Self> {
        if n_voters == 0 || k == 0 {
            return Err(FrdError::Precondition("default matrix needs N >= 1 and k >= 1".into()));
        }
        Ok(Self {
            k,
            rows: vec![Allocation::Default; n_voters],
        })
    }

    pub fn from_rows(k: usize, rows: Vec<Allocation>) -> Result<Self> {
        if rows.is_empty() || k == 0 {
            return Err(FrdError::Precondition("weight matrix needs N >= 1 and k >= 1".into()));
        }
        for row in &rows {
            if let Allocation::Even(targets) = row {
                let mut seen = vec![false; k];
                if targets.is_empty() {
                    return Err(FrdError::Precondition("an allocation needs at least one target".into()));
                }
                for &t in targets.iter() {
                    if t >= k || seen[t] {
                        return Err(FrdError::InvalidMembers { m: k });
                    }
                    seen[t] = true;
                }
            }
        }
        Ok(Self { k, rows })
    }

    pub fn n_voters(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, voter: usize) -> &Allocation {
        &self.rows[voter]
    }

    /// Voting power voter `voter` gives the member at `position`.
    pub fn entry(&self, voter: usize, position: usize) -> Ratio<u64> {
        match &self.rows[voter] {
            Allocation::Default => Ratio::new(1, self.k as u64),
            Allocation::Even(t) if t.contains(&position) => Ratio::new(1, t.len() as u64),
            Allocation::Even(_) => Ratio::from_integer(0),
        }
    }

    /// Total voting power held by each member.
    pub fn column_sums(&self) -> Vec<BigRational> {
        (0..self.k)
            .map(|l| {
                let mut acc = MassAccumulator::new(self.k);
                for j in 0..self.rows.len() {
                    let w = self.entry(j, l);
                    acc.add(*w.numer(), *w.denom() as usize);
                }
                acc.finish()
            })
            .collect()
    }
}

pub fn default_matrix(n_voters: usize, k: usize) -> Result<WeightMatrix> {
    WeightMatrix::default_matrix(n_voters, k)
}

/// Sums of fractions with small denominators, kept as integer numerators per
/// denominator and combined exactly at the end.
#[derive(Debug, Clone)]
pub(crate) struct MassAccumulator {
    numerators: Vec<u64>,
}

impl MassAccumulator {
    pub(crate) fn new(max_denominator: usize) -> Self {
        Self {
            numerators: vec![0; max_denominator + 1],
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, numerator: u64, denominator: usize) {
        self.numerators[denominator] += numerator;
    }

    pub(crate) fn finish(&self) -> BigRational {
        let mut lcm: u128 = 1;
        let mut fits = true;
        for (d, &num) in self.numerators.iter().enumerate() {
            if num != 0 {
                match lcm.checked_mul(d as u128 / lcm.gcd(&(d as u128))) {
                    Some(l) if l <= i64::MAX as u128 => lcm = l,
                    _ => {
                        fits = false;
                        break;
                    }
                }
            }
        }
        if fits {
            let mut total: u128 = 0;
            for (d, &num) in self.numerators.iter().enumerate() {
                if num != 0 {
                    match (num as u128)
                        .checked_mul(lcm / d as u128)
                        .and_then(|v| total.checked_add(v))
                    {
                        Some(t) => total = t,
                        None => {
                            fits = false;
                            break;
                        }
                    }
                }
            }
            if fits {
                return BigRational::new(BigInt::from(total), BigInt::from(lcm));
            }
        }
        self.numerators
            .iter()
            .enumerate()
            .filter(|(_, &n)| n != 0)
            .map(|(d, &n)| BigRational::new(BigInt::from(n), BigInt::from(d)))
            .fold(BigRational::zero(), |a, b| a + b)
    }
}

/// `(X1, X0)`: total power held by members preferring 1 and 0 on `issue`.
pub fn column_mass(w: &WeightMatrix, committee: &Committee, issue: usize) -> Result<(BigRational, BigRational)> {
    if w.k() != committee.k() {
        return Err(FrdError::DimensionMismatch {
            what: "committee size",
            expected: committee.k(),
            found: w.k(),
        });
    }
    if issue >= committee.n_issues() {
        return Err(FrdError::DimensionMismatch {
            what: "issue index",
            expected: committee.n_issues(),
            found: issue,
        });
    }
    let k = w.k();
    let k1 = committee.k1(issue) as u64;
    let mut acc = MassAccumulator::new(k);
    for row in &w.rows {
        match row {
            Allocation::Default => acc.add(k1, k),
            Allocation::Even(t) => {
                let ones = t.iter().filter(|&&p| committee.prefers(p, issue)).count();
                acc.add(ones as u64, t.len());
            }
        }
    }
    let x1 = acc.finish();
    let x0 = BigRational::from_integer(BigInt::from(w.n_voters())) - &x1;
    Ok((x1, x0))
}

/// A scheme bound to one committee and ballot profile, ready to produce
/// per-issue allocations.
#[derive(Debug, Clone)]
pub struct PreparedScheme {
    kind: SchemeKind,
    k: usize,
    /// Fixed targets per voter (Approve / Best-m); `None` keeps the default.
    targets: Vec<Option<Arc<[usize]>>>,
    target_bits: Vec<u64>,
    /// Members preferring 1, per issue.
    issue_bits: Vec<u64>,
    words: usize,
}

impl PreparedScheme {
    pub fn new(kind: SchemeKind, committee: &Committee, ballots: Option<&ElectoralBallots>) -> Result<Self> {
        let k = committee.k();
        let words = k.div_ceil(64);
        let members = committee.members();
        let incompatible = |expected: &'static str| FrdError::BallotForm {
            rule: kind.name(),
            expected,
            found: ballots.map_or("none", |b| b.form().name()),
        };
        let targets: Vec<Option<Arc<[usize]>>> = match kind {
            SchemeKind::None | SchemeKind::Optimal => Vec::new(),
            SchemeKind::Approve => match ballots {
                Some(ElectoralBallots::Approval(a)) => (0..a.n_voters())
                    .map(|j| {
                        let t: Vec<usize> = (0..k).filter(|&p| a.approves(j, members[p])).collect();
                        (!t.is_empty()).then(|| Arc::from(t))
                    })
                    .collect(),
                _ => return Err(incompatible("approval")),
            },
            SchemeKind::Best1 | SchemeKind::Best3 => {
                let best = kind.best_count().unwrap();
                if best > k {
                    return Err(FrdError::Precondition(format!(
                        "{kind} needs a committee of at least {best} members, got {k}"
                    )));
                }
                match ballots {
                    Some(ElectoralBallots::Ordinal(o)) => (0..o.n_voters())
                        .map(|j| {
                            let mut t: Vec<usize> = (0..k).collect();
                            t.sort_by_key(|&p| o.rank(j, members[p]));
                            t.truncate(best);
                            Some(Arc::from(t))
                        })
                        .collect(),
                    _ => return Err(incompatible("ordinal")),
                }
            }
        };
        let mut target_bits = vec![0u64; targets.len() * words];
        for (j, t) in targets.iter().enumerate() {
            for &p in t.iter().flat_map(|t| t.iter()) {
                target_bits[j * words + p / 64] |= 1 << (p % 64);
            }
        }
        let r = committee.n_issues();
        let mut issue_bits = vec![0u64; r * words];
        for issue in 0..r {
            for p in 0..k {
                if committee.prefers(p, issue) {
                    issue_bits[issue * words + p / 64] |= 1 << (p % 64);
                }
            }
        }
        Ok(Self {
            kind,
            k,
            targets,
            target_bits,
            issue_bits,
            words,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    fn check(&self, issue: usize, voters: &IssueProfile, committee: &Committee, delegators: &[bool]) -> Result<()> {
        check_same_issues(voters, committee.member_prefs())?;
        if committee.k() != self.k {
            return Err(FrdError::DimensionMismatch {
                what: "committee size",
                expected: self.k,
                found: committee.k(),
            });
        }
        if issue >= voters.n_issues() {
            return Err(FrdError::DimensionMismatch {
                what: "issue index",
                expected: voters.n_issues(),
                found: issue,
            });
        }
        if delegators.len() != voters.n_agents() {
            return Err(FrdError::DimensionMismatch {
                what: "delegator flags",
                expected: voters.n_agents(),
                found: delegators.len(),
            });
        }
        if !self.targets.is_empty() && self.targets.len() != voters.n_agents() {
            return Err(FrdError::DimensionMismatch {
                what: "ballot voter count",
                expected: voters.n_agents(),
                found: self.targets.len(),
            });
        }
        Ok(())
    }

    /// The full allocation matrix for `issue`.
    pub fn weights<R: Rng + ?Sized>(
        &self,
        issue: usize,
        voters: &IssueProfile,
        committee: &Committee,
        delegators: &[bool],
        rng: &mut R,
    ) -> Result<WeightMatrix> {
        self.check(issue, voters, committee, delegators)?;
        let rows = (0..voters.n_agents())
            .map(|j| {
                if !delegators[j] {
                    return Allocation::Default;
                }
                match self.kind {
                    SchemeKind::None => Allocation::Default,
                    SchemeKind::Optimal => {
                        let side = voters.get(j, issue);
                        let agreeing: Vec<usize> =
                            (0..self.k).filter(|&p| committee.prefers(p, issue) == side).collect();
                        if agreeing.is_empty() {
                            Allocation::Default
                        } else {
                            let pick = agreeing[rng.random_range(0..agreeing.len())];
                            Allocation::Even(Arc::from([pick]))
                        }
                    }
                    _ => match &self.targets[j] {
                        Some(t) => Allocation::Even(Arc::clone(t)),
                        None => Allocation::Default,
                    },
                }
            })
            .collect();
        Ok(WeightMatrix { k: self.k, rows })
    }

    /// `X1` for `issue`, computed without materializing the matrix.
    pub fn mass(
        &self,
        issue: usize,
        voters: &IssueProfile,
        committee: &Committee,
        delegators: &[bool],
    ) -> Result<BigRational> {
        self.check(issue, voters, committee, delegators)?;
        let k = self.k;
        let k1 = committee.k1(issue) as u64;
        let mut acc = MassAccumulator::new(k);
        let issue_bits = &self.issue_bits[issue * self.words..(issue + 1) * self.words];
        for (j, &delegates) in delegators.iter().enumerate() {
            if !delegates {
                acc.add(k1, k);
                continue;
            }
            match self.kind {
                SchemeKind::None => acc.add(k1, k),
                SchemeKind::Optimal => {
                    let side = voters.get(j, issue);
                    let agreeing = if side { k1 } else { k as u64 - k1 };
                    match (agreeing > 0, side) {
                        (true, true) => acc.add(1, 1),
                        (true, false) => {}
                        (false, _) => acc.add(k1, k),
                    }
                }
                _ => match &self.targets[j] {
                    Some(t) => {
                        let bits = &self.target_bits[j * self.words..(j + 1) * self.words];
                        let ones: u32 = bits.iter().zip(issue_bits).map(|(a, b)| (a & b).count_ones()).sum();
                        acc.add(ones as u64, t.len());
                    }
                    None => acc.add(k1, k),
                },
            }
        }
        Ok(acc.finish())
    }
}

/// Builds the allocation matrix of `scheme` for one issue.
#[allow(clippy::too_many_arguments)]
pub fn apply_scheme<R: Rng + ?Sized>(
    scheme: &DelegationScheme,
    issue: usize,
    voters: &IssueProfile,
    committee: &Committee,
    ballots: Option<&ElectoralBallots>,
    delegators: &[bool],
    rng: &mut R,
) -> Result<WeightMatrix> {
    PreparedScheme::new(scheme.kind(), committee, ballots)?.weights(issue, voters, committee, delegators, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballots::{derive_approvals, derive_ordering, derive_weights};
    use crate::fixtures::three_voters;
    use crate::model::canonicalize;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn example_committee() -> (IssueProfile, Committee) {
        let ex = three_voters();
        let committee = Committee::new(&ex.representatives, vec![0, 1, 2]).unwrap();
        (ex.voters, committee)
    }

    #[test]
    fn default_matrix_entries_and_mass() {
        let w = default_matrix(3, 3).unwrap();
        assert!((0..3).all(|j| (0..3).all(|l| w.entry(j, l) == Ratio::new(1, 3))));
        assert_eq!(w.column_sums(), vec![q(1, 1); 3]);
        let one = default_matrix(1, 1).unwrap();
        assert_eq!(one.entry(0, 0), Ratio::from_integer(1));
        for (n, k) in [(7, 3), (301, 21), (2, 5)] {
            let total: BigRational = default_matrix(n, k).unwrap().column_sums().into_iter().sum();
            assert_eq!(total, q(n as i64, 1));
        }
        assert!(default_matrix(0, 3).is_err());
    }

    #[test]
    fn select_delegators_extremes_and_rate() {
        let mut rng = rng_from_seed(5);
        assert!(select_delegators(100, 0.0, &mut rng).unwrap().iter().all(|&d| !d));
        assert!(select_delegators(100, 1.0, &mut rng).unwrap().iter().all(|&d| d));
        let count = select_delegators(10_000, 0.5, &mut rng)
            .unwrap()
            .iter()
            .filter(|&&d| d)
            .count();
        assert!((count as i64 - 5000).abs() <= 150, "{count}");
        assert!(matches!(
            select_delegators(3, 1.5, &mut rng),
            Err(FrdError::InvalidProbability(_))
        ));
    }

    #[test]
    fn exact_count_sampling_and_nesting() {
        let draw = DelegationDraw::new(100, &mut rng_from_seed(2));
        let d = draw.delegators(0.29, DelegatorSampling::ExactCount).unwrap();
        assert_eq!(d.iter().filter(|&&x| x).count(), 29);
        let lo = draw.delegators(0.3, DelegatorSampling::Bernoulli).unwrap();
        let hi = draw.delegators(0.6, DelegatorSampling::Bernoulli).unwrap();
        assert!(lo.iter().zip(&hi).all(|(&a, &b)| !a || b));
        let sides: Vec<bool> = (0..100).map(|j| j % 2 == 0).collect();
        let split = draw.delegators_by_side(&sides, 1.0, 0.0).unwrap();
        assert_eq!(split, sides);
    }

    #[test]
    fn three_voter_optimal_delegations() {
        let (voters, committee) = example_committee();
        let ex = three_voters();
        let scheme = DelegationScheme::new(SchemeKind::Optimal, 1.0).unwrap();
        let mut rng = rng_from_seed(0);
        let w1 = apply_scheme(&scheme, 0, &voters, &committee, None, &ex.delegators[0], &mut rng).unwrap();
        assert_eq!(w1.column_sums(), vec![q(2, 3), q(2, 3), q(5, 3)]);
        assert_eq!(column_mass(&w1, &committee, 0).unwrap(), (q(4, 3), q(5, 3)));
        let w2 = apply_scheme(&scheme, 1, &voters, &committee, None, &ex.delegators[1], &mut rng).unwrap();
        assert_eq!(w2.column_sums(), vec![q(5, 3), q(2, 3), q(2, 3)]);
        assert_eq!(column_mass(&w2, &committee, 1).unwrap().0, q(5, 3));
    }

    #[test]
    fn default_column_mass_is_proportional_to_k1() {
        let (_, committee) = example_committee();
        let w = default_matrix(3, 3).unwrap();
        assert_eq!(column_mass(&w, &committee, 0).unwrap().0, q(2, 1));
        assert_eq!(column_mass(&w, &committee, 1).unwrap().0, q(1, 1));
    }

    #[test]
    fn optimal_delegator_without_ally_keeps_default() {
        let voters = IssueProfile::from_rows(&[[1u8], [1], [0]]).unwrap();
        let cands = IssueProfile::from_rows(&[[1u8], [1], [1]]).unwrap();
        let committee = Committee::new(&cands, vec![0, 1, 2]).unwrap();
        let p = PreparedScheme::new(SchemeKind::Optimal, &committee, None).unwrap();
        let w = p
            .weights(0, &voters, &committee, &[false, false, true], &mut rng_from_seed(0))
            .unwrap();
        assert_eq!(w.row(2), &Allocation::Default);
    }

    #[test]
    fn incompatible_ballots_are_rejected() {
        let (voters, committee) = example_committee();
        let weights = derive_weights(&voters, &three_voters().representatives).unwrap();
        assert!(matches!(
            PreparedScheme::new(SchemeKind::Approve, &committee, Some(&weights)),
            Err(FrdError::BallotForm { .. })
        ));
        assert!(PreparedScheme::new(SchemeKind::Best3, &committee, None).is_err());
    }

    #[test]
    fn approve_and_best_rows_follow_ballots() {
        let (voters, committee) = example_committee();
        let reps = three_voters().representatives;
        let approvals = derive_approvals(&voters, &reps).unwrap();
        let p = PreparedScheme::new(SchemeKind::Approve, &committee, Some(&approvals)).unwrap();
        let all = [true; 3];
        let w = p.weights(0, &voters, &committee, &all, &mut rng_from_seed(0)).unwrap();
        // v1 = (1,1) agrees fully with d1 and half with d2: approves only d1.
        assert_eq!(w.row(0), &Allocation::Even(Arc::from([0])));
        // v3 = (0,0) approves only d3.
        assert_eq!(w.row(2), &Allocation::Even(Arc::from([2])));
        let ordinal = derive_ordering(&voters, &reps, &mut rng_from_seed(1)).unwrap();
        let p = PreparedScheme::new(SchemeKind::Best1, &committee, Some(&ordinal)).unwrap();
        let w = p.weights(1, &voters, &committee, &all, &mut rng_from_seed(0)).unwrap();
        assert_eq!(w.row(0), &Allocation::Even(Arc::from([0])));
    }

    proptest! {
        #[test]
        fn schemes_conserve_mass_and_match_fast_path(
            n in 1usize..12, m in 3usize..8, r in 1usize..8, alpha in 0.0f64..=1.0, seed in any::<u64>(),
            kind in proptest::sample::select(SchemeKind::ALL.to_vec()),
        ) {
            let mut rng = rng_from_seed(seed);
            let raw = IssueProfile::random(n, r, &mut rng).unwrap();
            let canon = canonicalize(&raw, &mut rng);
            let voters = canon.profile;
            let cands = IssueProfile::random(m, r, &mut rng).unwrap().flipped(&canon.flips).unwrap();
            let k = if m % 2 == 1 { m } else { m - 1 };
            let committee = Committee::new(&cands, (0..k).rev().collect()).unwrap();
            let ballots = match kind {
                SchemeKind::Approve => Some(derive_approvals(&voters, &cands).unwrap()),
                SchemeKind::Best1 | SchemeKind::Best3 => Some(derive_ordering(&voters, &cands, &mut rng).unwrap()),
                _ => None,
            };
            let prepared = PreparedScheme::new(kind, &committee, ballots.as_ref()).unwrap();
            let mut fixed_rows: Option<Vec<Allocation>> = None;
            for issue in 0..r {
                let delegators = select_delegators(n, alpha, &mut rng).unwrap();
                let w = prepared.weights(issue, &voters, &committee, &delegators, &mut rng).unwrap();
                let total: BigRational = w.column_sums().into_iter().sum();
                prop_assert_eq!(total, q(n as i64, 1));
                for j in 0..n {
                    let row: Ratio<u64> = (0..k).map(|l| w.entry(j, l)).sum();
                    prop_assert_eq!(row, Ratio::from_integer(1));
                }
                let (x1, _) = column_mass(&w, &committee, issue).unwrap();
                prop_assert_eq!(&x1, &prepared.mass(issue, &voters, &committee, &delegators).unwrap());
                if kind == SchemeKind::Optimal {
                    for (j, &delegates) in delegators.iter().enumerate() {
                        if delegates && w.row(j) != &Allocation::Default {
                            let side = voters.get(j, issue);
                            for l in 0..k {
                                if committee.prefers(l, issue) != side {
                                    prop_assert_eq!(w.entry(j, l), Ratio::from_integer(0));
                                }
                            }
                        }
                    }
                    // Outcome invariance to which ally receives the vote.
                    let other = prepared.weights(issue, &voters, &committee, &delegators, &mut rng_from_seed(seed ^ 1)).unwrap();
                    prop_assert_eq!(column_mass(&other, &committee, issue).unwrap().0, x1);
                }
                if matches!(kind, SchemeKind::Approve | SchemeKind::Best1 | SchemeKind::Best3) {
                    let all = vec![true; n];
                    let rows: Vec<Allocation> = (0..n)
                        .map(|j| prepared.weights(issue, &voters, &committee, &all, &mut rng).unwrap().row(j).clone())
                        .collect();
                    if let Some(prev) = &fixed_rows {
                        prop_assert_eq!(prev, &rows);
                    }
                    fixed_rows = Some(rows);
                }
            }
        }
    }
}
