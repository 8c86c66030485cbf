//! Committee selection rules.
//!
//! Every rule is deterministic apart from uniformly random tie-breaking.
//! Rule functions return the winners in election order and accept any
//! `1 <= k <= m`; [`ElectionRule`] adds the odd-size committee contract.

mod enumerate;
mod stv;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ballots::{ApprovalBallots, BallotForm, CardinalBallots, ElectoralBallots, OrdinalBallots};
use crate::error::{FrdError, Result};
use crate::model::{Committee, IssueProfile};
use crate::tiebreak::{argmax_uniform, rank_desc, HybridScores};

pub use enumerate::{binomial, chamberlin_courant, k_median, ENUMERATION_LIMIT};
pub use stv::{droop_quota, stv, WEIGHT_UNIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Av,
    Rav,
    Stv,
    Borda,
    Cc,
    #[serde(rename = "kmedian")]
    KMedian,
    Weighted,
    Sortition,
}

impl RuleKind {
    pub const ALL: [RuleKind; 8] = [
        RuleKind::Av,
        RuleKind::Rav,
        RuleKind::Stv,
        RuleKind::Borda,
        RuleKind::Cc,
        RuleKind::KMedian,
        RuleKind::Weighted,
        RuleKind::Sortition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Av => "av",
            RuleKind::Rav => "rav",
            RuleKind::Stv => "stv",
            RuleKind::Borda => "borda",
            RuleKind::Cc => "cc",
            RuleKind::KMedian => "kmedian",
            RuleKind::Weighted => "weighted",
            RuleKind::Sortition => "sortition",
        }
    }

    /// Ballot form the rule consumes; sortition ignores ballots.
    pub fn required_form(self) -> Option<BallotForm> {
        match self {
            RuleKind::Av | RuleKind::Rav => Some(BallotForm::Approval),
            RuleKind::Stv | RuleKind::Borda | RuleKind::Cc | RuleKind::KMedian => Some(BallotForm::Ordinal),
            RuleKind::Weighted => Some(BallotForm::Cardinal),
            RuleKind::Sortition => None,
        }
    }

    /// Stable numeric id used when deriving seeds.
    pub fn id(self) -> u64 {
        Self::ALL.iter().position(|&r| r == self).unwrap() as u64
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = FrdError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| FrdError::InvalidSpec(format!("unknown rule {s:?}")))
    }
}

/// A rule together with its (odd) committee size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElectionRule {
    kind: RuleKind,
    k: usize,
}

impl ElectionRule {
    pub fn new(kind: RuleKind, k: usize) -> Result<Self> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(FrdError::InvalidCommitteeSize(k));
        }
        Ok(Self { kind, k })
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Winner indices in election order.
    pub fn winners<R: Rng + ?Sized>(&self, ballots: &ElectoralBallots, rng: &mut R) -> Result<Vec<usize>> {
        let k = self.k;
        let mismatch = |expected: BallotForm| FrdError::BallotForm {
            rule: self.kind.name(),
            expected: expected.name(),
            found: ballots.form().name(),
        };
        match (self.kind, ballots) {
            (RuleKind::Av, ElectoralBallots::Approval(b)) => approval_voting(b, k, rng),
            (RuleKind::Rav, ElectoralBallots::Approval(b)) => rav(b, k, rng),
            (RuleKind::Stv, ElectoralBallots::Ordinal(b)) => stv(b, k, rng),
            (RuleKind::Borda, ElectoralBallots::Ordinal(b)) => borda(b, k, rng),
            (RuleKind::Cc, ElectoralBallots::Ordinal(b)) => chamberlin_courant(b, k, rng),
            (RuleKind::KMedian, ElectoralBallots::Ordinal(b)) => k_median(b, k, rng),
            (RuleKind::Weighted, ElectoralBallots::Cardinal(b)) => weighted_rule(b, k, rng),
            (RuleKind::Sortition, b) => sortition(b.n_candidates(), k, rng),
            (kind, _) => Err(mismatch(kind.required_form().expect("sortition handled"))),
        }
    }

    /// Elects a committee and copies the members' issue preferences.
    pub fn elect<R: Rng + ?Sized>(
        &self,
        ballots: &ElectoralBallots,
        candidates: &IssueProfile,
        rng: &mut R,
    ) -> Result<Committee> {
        if ballots.n_candidates() != candidates.n_agents() {
            return Err(FrdError::DimensionMismatch {
                what: "candidate count",
                expected: candidates.n_agents(),
                found: ballots.n_candidates(),
            });
        }
        Committee::new(candidates, self.winners(ballots, rng)?)
    }
}

pub(crate) fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 {
        return Err(FrdError::Precondition("committee size must be at least 1".into()));
    }
    if k > m {
        return Err(FrdError::CommitteeTooLarge { k, m });
    }
    Ok(())
}

/// The `k` candidates with the most approvals.
pub fn approval_voting<R: Rng + ?Sized>(ballots: &ApprovalBallots, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let m = ballots.n_candidates();
    check_k(k, m)?;
    let counts = ballots.counts();
    let mut order = rank_desc(m, rng, |a, b| counts[a].cmp(&counts[b]));
    order.truncate(k);
    Ok(order)
}

/// Sequential re-weighted approval voting: in each round a voter's ballot
/// counts `1 / (1 + w)`, `w` being the number of winners they approve.
pub fn rav<R: Rng + ?Sized>(ballots: &ApprovalBallots, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let (n, m) = (ballots.n_voters(), ballots.n_candidates());
    check_k(k, m)?;
    let mut elected = Vec::with_capacity(k);
    let mut is_elected = vec![false; m];
    let mut satisfied = vec![0usize; n];
    // by_level[c * (k + 1) + w]: voters approving c who approve w winners.
    let mut by_level = vec![0u64; m * (k + 1)];
    for _ in 0..k {
        by_level.iter_mut().for_each(|x| *x = 0);
        for (j, &w) in satisfied.iter().enumerate() {
            for (c, &a) in ballots.row(j).iter().enumerate() {
                if a {
                    by_level[c * (k + 1) + w] += 1;
                }
            }
        }
        let levels = |c: usize| &by_level[c * (k + 1)..(c + 1) * (k + 1)];
        let approx: Vec<f64> = (0..m)
            .map(|c| {
                levels(c)
                    .iter()
                    .enumerate()
                    .map(|(w, &cnt)| cnt as f64 / (w + 1) as f64)
                    .sum()
            })
            .collect();
        let scores = HybridScores::new(approx, |c| {
            levels(c)
                .iter()
                .enumerate()
                .filter(|(_, &cnt)| cnt > 0)
                .map(|(w, &cnt)| BigRational::new(BigInt::from(cnt), BigInt::from(w + 1)))
                .sum()
        });
        let open: Vec<usize> = (0..m).filter(|&c| !is_elected[c]).collect();
        let winner = argmax_uniform(&open, rng, |a, b| scores.cmp(a, b)).expect("k <= m");
        is_elected[winner] = true;
        elected.push(winner);
        for (j, w) in satisfied.iter_mut().enumerate() {
            if ballots.approves(j, winner) {
                *w += 1;
            }
        }
    }
    Ok(elected)
}

/// Top-`k` by Borda score `Σ_j (m - rank_j(c))`.
pub fn borda<R: Rng + ?Sized>(ballots: &OrdinalBallots, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let (n, m) = (ballots.n_voters(), ballots.n_candidates());
    check_k(k, m)?;
    let mut scores = vec![0u64; m];
    for j in 0..n {
        for (c, &rank) in ballots.ranks(j).iter().enumerate() {
            scores[c] += (m as u64) - rank as u64;
        }
    }
    let mut order = rank_desc(m, rng, |a, b| scores[a].cmp(&scores[b]));
    order.truncate(k);
    Ok(order)
}

/// Exact column sums of a cardinal ballot matrix.
pub fn cardinal_totals(ballots: &CardinalBallots) -> Vec<BigRational> {
    (0..ballots.n_candidates()).map(|c| exact_column(ballots, c)).collect()
}

fn exact_column(ballots: &CardinalBallots, c: usize) -> BigRational {
    // Rows derived from agreement share few denominators; sum per denominator first.
    let mut per_denom: std::collections::BTreeMap<u64, u128> = Default::default();
    for j in 0..ballots.n_voters() {
        let w = ballots.weight(j, c);
        if *w.numer() != 0 {
            *per_denom.entry(*w.denom()).or_default() += *w.numer() as u128;
        }
    }
    per_denom
        .into_iter()
        .map(|(d, num)| BigRational::new(BigInt::from(num), BigInt::from(d)))
        .sum()
}

/// Top-`k` candidates by total cardinal weight.
pub fn weighted_rule<R: Rng + ?Sized>(ballots: &CardinalBallots, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let (n, m) = (ballots.n_voters(), ballots.n_candidates());
    check_k(k, m)?;
    let mut approx = vec![0f64; m];
    for j in 0..n {
        for (c, total) in approx.iter_mut().enumerate() {
            *total += ballots.approx(j, c);
        }
    }
    let scores = HybridScores::new(approx, |c| exact_column(ballots, c));
    let mut order = rank_desc(m, rng, |a, b| scores.cmp(a, b));
    order.truncate(k);
    Ok(order)
}

/// A uniformly random `k`-subset of the `m` candidates.
pub fn sortition<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_k(k, m)?;
    Ok(rand::seq::index::sample(rng, m, k).into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballots::{derive_approvals, derive_ordering, derive_weights};
    use crate::fixtures::anscombe;
    use crate::model::canonicalize;
    use crate::seed::rng_from_seed;
    use num_rational::Ratio;
    use std::collections::HashMap;

    fn approvals(rows: &[&[u8]]) -> ApprovalBallots {
        ApprovalBallots::new(rows.iter().map(|r| r.iter().map(|&x| x == 1).collect()).collect()).unwrap()
    }

    fn approvals_with_counts(counts: &[usize], n: usize) -> ApprovalBallots {
        ApprovalBallots::new((0..n).map(|j| counts.iter().map(|&c| j < c).collect()).collect()).unwrap()
    }

    /// Asserts each outcome's frequency is within 3σ of `p`.
    fn assert_uniform<T: std::fmt::Debug>(counts: &HashMap<T, u64>, trials: u64, p: f64) {
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for (k, &n) in counts {
            assert!((n as f64 - trials as f64 * p).abs() <= 3.0 * sigma, "{k:?}: {n}");
        }
    }

    #[test]
    fn av_unique_max_and_forced_full_set() {
        let b = approvals_with_counts(&[5, 3, 3, 1], 5);
        assert_eq!(approval_voting(&b, 1, &mut rng_from_seed(0)).unwrap(), vec![0]);
        let mut all = approval_voting(&b, 4, &mut rng_from_seed(0)).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(matches!(
            approval_voting(&b, 5, &mut rng_from_seed(0)),
            Err(FrdError::CommitteeTooLarge { k: 5, m: 4 })
        ));
    }

    #[test]
    fn av_tie_break_is_uniform() {
        let b = approvals_with_counts(&[2, 2, 2], 3);
        let trials = 10_000;
        let mut counts = HashMap::new();
        for s in 0..trials {
            *counts
                .entry(approval_voting(&b, 1, &mut rng_from_seed(s)).unwrap()[0])
                .or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 3);
        assert_uniform(&counts, trials, 1.0 / 3.0);
    }

    #[test]
    fn rav_reweights_second_round() {
        let mut rows: Vec<&[u8]> = vec![&[1, 1, 0]; 4];
        rows.extend(vec![&[0u8, 0, 1][..]; 3]);
        let b = approvals(&rows);
        for s in 0..50 {
            let w = rav(&b, 2, &mut rng_from_seed(s)).unwrap();
            assert!(w[0] == 0 || w[0] == 1);
            assert_eq!(w[1], 2);
        }
    }

    #[test]
    fn rav_single_seat_matches_av() {
        let b = approvals(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1], &[0, 1, 0]]);
        for s in 0..50 {
            assert_eq!(
                rav(&b, 1, &mut rng_from_seed(s)).unwrap(),
                approval_voting(&b, 1, &mut rng_from_seed(s)).unwrap()
            );
        }
    }

    #[test]
    fn rav_empty_ballots_pick_uniform_subsets() {
        let b = approvals(&[&[0, 0, 0], &[0, 0, 0]]);
        let trials = 6_000;
        let mut counts = HashMap::new();
        for s in 0..trials {
            let mut w = rav(&b, 2, &mut rng_from_seed(s)).unwrap();
            w.sort();
            *counts.entry(w).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 3);
        assert_uniform(&counts, trials, 1.0 / 3.0);
    }

    #[test]
    fn borda_single_voter_and_reversed_pair() {
        let b = OrdinalBallots::from_orders(vec![vec![2, 0, 1]]).unwrap();
        assert_eq!(borda(&b, 1, &mut rng_from_seed(1)).unwrap(), vec![2]);
        // Scores (2+0, 1+1, 0+2): all equal, so every candidate wins a third of the time.
        let b = OrdinalBallots::from_orders(vec![vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        let trials = 9_000;
        let mut counts = HashMap::new();
        for s in 0..trials {
            *counts
                .entry(borda(&b, 1, &mut rng_from_seed(s)).unwrap()[0])
                .or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 3);
        assert_uniform(&counts, trials, 1.0 / 3.0);
        let mut all = borda(&b, 3, &mut rng_from_seed(0)).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
    }

    #[test]
    fn weighted_rule_picks_heaviest_and_flips_fair_coin() {
        let one = CardinalBallots::new(vec![vec![Ratio::new(1, 5), Ratio::new(3, 5), Ratio::new(1, 5)]]).unwrap();
        assert_eq!(weighted_rule(&one, 1, &mut rng_from_seed(0)).unwrap(), vec![1]);
        // Column sums (6/5, 9/10, 9/10).
        let row = vec![Ratio::new(2, 5), Ratio::new(3, 10), Ratio::new(3, 10)];
        let b = CardinalBallots::new(vec![row.clone(), row.clone(), row]).unwrap();
        let totals = cardinal_totals(&b);
        assert_eq!(totals[0], BigRational::new(6.into(), 5.into()));
        assert_eq!(totals[1], totals[2]);
        let trials = 10_000;
        let mut counts = HashMap::new();
        for s in 0..trials {
            let w = weighted_rule(&b, 2, &mut rng_from_seed(s)).unwrap();
            assert_eq!(w[0], 0);
            *counts.entry(w[1]).or_insert(0) += 1;
        }
        assert_uniform(&counts, trials, 0.5);
        let mut all = weighted_rule(&b, 3, &mut rng_from_seed(0)).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
    }

    #[test]
    fn sortition_is_uniform_and_distinct() {
        let trials = 10_000;
        let mut counts = HashMap::new();
        for s in 0..trials {
            *counts
                .entry(sortition(3, 1, &mut rng_from_seed(s)).unwrap()[0])
                .or_insert(0) += 1;
        }
        assert_uniform(&counts, trials, 1.0 / 3.0);
        let mut all = sortition(5, 5, &mut rng_from_seed(9)).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        for s in 0..100 {
            let mut w = sortition(9, 5, &mut rng_from_seed(s)).unwrap();
            w.sort();
            w.dedup();
            assert_eq!(w.len(), 5);
        }
    }

    #[test]
    fn election_rule_checks_odd_size_and_ballot_form() {
        assert!(matches!(
            ElectionRule::new(RuleKind::Av, 2),
            Err(FrdError::InvalidCommitteeSize(2))
        ));
        let (voters, cands) = anscombe();
        let ballots = derive_weights(&voters, &cands).unwrap();
        let rule = ElectionRule::new(RuleKind::Av, 1).unwrap();
        assert!(matches!(
            rule.winners(&ballots, &mut rng_from_seed(0)),
            Err(FrdError::BallotForm { .. })
        ));
    }

    #[test]
    fn anscombe_av_borda_stv_elect_all_zeros() {
        let (voters, cands) = anscombe();
        let canon = canonicalize(&voters, &mut rng_from_seed(0));
        assert!(canon.flips == crate::model::FlipMask::none(11), "majority is already 1");
        let approvals = derive_approvals(&voters, &cands).unwrap();
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let ordinal = derive_ordering(&voters, &cands, &mut rng).unwrap();
            for (kind, ballots) in [
                (RuleKind::Av, &approvals),
                (RuleKind::Borda, &ordinal),
                (RuleKind::Stv, &ordinal),
            ] {
                let rule = ElectionRule::new(kind, 1).unwrap();
                assert_eq!(rule.winners(ballots, &mut rng).unwrap(), vec![1], "{kind}");
            }
        }
    }

    #[test]
    fn rule_names_round_trip() {
        for kind in RuleKind::ALL {
            assert_eq!(kind.name().parse::<RuleKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
    }
}
