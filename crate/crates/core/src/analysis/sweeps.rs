//! Exhaustive and randomized checks of the closed forms against direct
//! computation.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;
use rand::Rng;

use super::{
    brute_force_committee, chernoff_lower_bound, expected_mass, greedy_coverage, majority_guarantee_threshold,
    minority_overturn_threshold, parity_no_tie, x1_closed_form, CommitteeObjective, IssueScenario,
    ProbabilisticScenario,
};
use crate::delegation::{PreparedScheme, SchemeKind};
use crate::error::Result;
use crate::model::{canonicalize, Committee, IssueProfile};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl SweepReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {}: {} cases, {} failures",
            self.name, self.cases, self.failures
        )?;
        if let Some(first) = &self.first_failure {
            write!(f, " (first: {first})")?;
        }
        Ok(())
    }
}

fn big(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `X1` obtained by building the scenario as profiles and running the
/// optimal delegation scheme.
fn realized_x1(s: &IssueScenario) -> Result<BigRational> {
    let voters = IssueProfile::from_fn(s.n, 1, |j, _| j < s.n1)?;
    let cands = IssueProfile::from_fn(s.k, 1, |c, _| c < s.k1)?;
    let committee = Committee::new(&cands, (0..s.k).collect())?;
    let delegators: Vec<bool> = (0..s.n)
        .map(|j| if j < s.n1 { j < s.lambda1 } else { j - s.n1 < s.lambda0 })
        .collect();
    PreparedScheme::new(SchemeKind::Optimal, &committee, None)?.mass(0, &voters, &committee, &delegators)
}

/// Every scenario with odd `N <= max_n`, odd `k <= max_k` and `0 < k1 < k`:
/// both thresholds classify outcomes exactly, and the closed form equals the
/// simulated mass.
pub fn threshold_sweep(max_n: usize, max_k: usize) -> Result<SweepReport> {
    let mut report = SweepReport::new("thresholds");
    for n in (1..=max_n).step_by(2) {
        let half = big(n) / big(2);
        for k in (3..=max_k).step_by(2) {
            for k1 in 1..k {
                for n1 in n.div_ceil(2)..=n {
                    let guarantee = majority_guarantee_threshold(n, n1, k, k1)?;
                    for l1 in 0..=n1 {
                        let overturn = minority_overturn_threshold(n, l1, k, k1)?;
                        let mut always = true;
                        for l0 in 0..=n - n1 {
                            let s = IssueScenario::new(n, n1, k, k1, l1, l0)?;
                            let x1 = x1_closed_form(&s);
                            let majority_wins = x1 > half;
                            always &= majority_wins;
                            let minority_wins = x1 < half;
                            let predicted = big(l0) > overturn;
                            report.record(minority_wins == predicted, || {
                                format!("{s:?}: X1={x1}, overturn threshold {overturn}")
                            });
                            let simulated = realized_x1(&s)?;
                            report.record(simulated == x1, || {
                                format!("{s:?}: closed form {x1}, simulated {simulated}")
                            });
                        }
                        let predicted = big(l1) > guarantee;
                        report.record(always == predicted, || {
                            format!("N={n} N1={n1} k={k} k1={k1} l1={l1}: guarantee threshold {guarantee}")
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Random optimal-delegation instances with odd `N <= 11` and odd `k <= 7`:
/// no issue's mass ever lands exactly on `N/2`.
pub fn parity_sweep(instances: u64, seed: u64) -> Result<SweepReport> {
    const ISSUES: usize = 3;
    let mut report = SweepReport::new("parity");
    for t in 0..instances {
        let mut rng = rng_from_seed(derive_seed(seed, "parity", &[t]));
        let n = 2 * rng.random_range(0..6usize) + 1;
        let k = 2 * rng.random_range(0..4usize) + 1;
        let raw = IssueProfile::random(n, ISSUES, &mut rng)?;
        let canon = canonicalize(&raw, &mut rng);
        let cands = IssueProfile::random(k, ISSUES, &mut rng)?.flipped(&canon.flips)?;
        let committee = Committee::new(&cands, (0..k).collect())?;
        let scheme = PreparedScheme::new(SchemeKind::Optimal, &committee, None)?;
        let alpha: f64 = rng.random();
        for issue in 0..ISSUES {
            let delegators: Vec<bool> = (0..n).map(|_| rng.random_bool(alpha)).collect();
            let w = scheme.weights(issue, &canon.profile, &committee, &delegators, &mut rng)?;
            let result = parity_no_tie(&w, &committee, issue);
            report.record(result.is_ok(), || {
                format!("instance {t} issue {issue}: {}", result.unwrap_err())
            });
        }
    }
    Ok(report)
}

/// Random scenarios with `μ > N/2` and `N <= 101`: the empirical win rate of
/// the majority is at least the bound minus three standard errors.
pub fn chernoff_sweep(scenarios: u64, trials: u64, seed: u64) -> Result<SweepReport> {
    let mut report = SweepReport::new("chernoff");
    let mut drawn = 0u64;
    while report.cases < scenarios {
        let mut rng = rng_from_seed(derive_seed(seed, "chernoff", &[drawn]));
        drawn += 1;
        let n = 2 * rng.random_range(1..=50usize) + 1;
        let k = 2 * rng.random_range(1..=10usize) + 1;
        let k1 = rng.random_range(1..k);
        let n1 = rng.random_range(n.div_ceil(2)..=n);
        let mut majority = vec![false; n];
        for slot in rand::seq::index::sample(&mut rng, n, n1) {
            majority[slot] = true;
        }
        let p: Vec<Ratio<u64>> = (0..n).map(|_| Ratio::new(rng.random_range(0..=20), 20)).collect();
        let scenario = ProbabilisticScenario::new(k, k1, p, majority)?;
        let mu = expected_mass(&scenario);
        if mu <= big(n) / big(2) {
            continue;
        }
        let bound = chernoff_lower_bound(&mu, n)?;
        let half = big(n) / big(2);
        let wins = (0..trials).filter(|_| scenario.sample_x1(&mut rng) > half).count();
        let rate = wins as f64 / trials as f64;
        let se = (rate * (1.0 - rate) / trials as f64).sqrt();
        report.record(rate >= bound - 3.0 * se, || {
            format!(
                "N={n} k={k} k1={k1} N1={n1} mu={:.4}: rate {rate:.4} < bound {bound:.4} - 3*{se:.4}",
                mu.to_f64().unwrap_or(f64::NAN)
            )
        });
    }
    Ok(report)
}

/// Random instances with `m <= 12`, `r <= 15`: greedy coverage reaches at
/// least `1 - 1/e` of the exact optimum and never exceeds it.
pub fn coverage_sweep(instances: u64, seed: u64) -> Result<SweepReport> {
    let mut report = SweepReport::new("coverage");
    let factor = 1.0 - (-1.0f64).exp();
    for t in 0..instances {
        let mut rng = rng_from_seed(derive_seed(seed, "coverage", &[t]));
        let m = rng.random_range(1..=12usize);
        let r = rng.random_range(1..=15usize);
        let k = rng.random_range(1..=m);
        let cands = IssueProfile::random(m, r, &mut rng)?;
        let greedy = greedy_coverage(&cands, k)?;
        let best = brute_force_committee(&cands, k, CommitteeObjective::Coverage)?;
        report.record(
            greedy.value as f64 >= factor * best.value as f64 && greedy.value <= best.value,
            || format!("m={m} r={r} k={k}: greedy {} vs optimum {}", greedy.value, best.value),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps_pass() {
        let t = threshold_sweep(5, 3).unwrap();
        assert!(t.passed(), "{t}");
        assert!(parity_sweep(300, 1).unwrap().passed());
        assert!(chernoff_sweep(3, 500, 1).unwrap().passed());
        assert!(coverage_sweep(30, 1).unwrap().passed());
    }

    #[test]
    fn report_formatting() {
        let mut r = SweepReport::new("demo");
        r.record(true, String::new);
        assert_eq!(r.to_string(), "PASS demo: 1 cases, 0 failures");
        r.record(false, || "boom".into());
        assert!(!r.passed());
        assert!(r.to_string().starts_with("FAIL demo"));
    }
}
