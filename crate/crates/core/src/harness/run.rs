use std::cell::OnceCell;

use rand::Rng;
use rayon::prelude::*;

use super::{CellKey, CellResult, ExperimentSpec, TrialRecord};
use crate::ballots::{AgreementTable, ApprovalBallots, BallotForm, CardinalBallots, ElectoralBallots, OrdinalBallots};
use crate::decide::{dd_outcome, frd_from_masses, rd_outcome, DecisionRecord};
use crate::delegation::{DelegationDraw, PreparedScheme, SchemeKind};
use crate::election::{ElectionRule, RuleKind};
use crate::error::{FrdError, Result};
use crate::model::{agreement, canonicalize, committee_stats, Committee, IssueProfile};
use crate::seed::{derive_seed, rng_from_seed};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FRDLAB_THREADS";

/// Uniform random voters and candidates, relabeled so that every issue's
/// voter majority is 1. Candidates are relabeled with the voters' mask.
pub fn generate_profiles<R: Rng + ?Sized>(
    n_voters: usize,
    n_candidates: usize,
    n_issues: usize,
    rng: &mut R,
) -> Result<(IssueProfile, IssueProfile)> {
    let voters = IssueProfile::random(n_voters, n_issues, rng)?;
    let candidates = IssueProfile::random(n_candidates, n_issues, rng)?;
    let canon = canonicalize(&voters, rng);
    let candidates = candidates.flipped(&canon.flips)?;
    Ok((canon.profile, candidates))
}

/// Profiles and derived ballots shared by every cell at one `(N, m, r, trial)`.
struct Instance {
    voters: IssueProfile,
    candidates: IssueProfile,
    table: AgreementTable,
    approval: ElectoralBallots,
    ordinal: OnceCell<ElectoralBallots>,
    cardinal: OnceCell<ElectoralBallots>,
    ordinal_seed: u64,
    dd: DecisionRecord,
}

impl Instance {
    fn new(master: u64, ctx: [u64; 4]) -> Result<Self> {
        let [n, m, r, _] = ctx.map(|v| v as usize);
        let mut rng = rng_from_seed(derive_seed(master, "instance", &ctx));
        let (voters, candidates) = generate_profiles(n, m, r, &mut rng)?;
        let table = AgreementTable::new(&voters, &candidates)?;
        let approval = ElectoralBallots::Approval(ApprovalBallots::from_table(&table));
        let dd = dd_outcome(&voters, &mut rng_from_seed(derive_seed(master, "dd", &ctx)));
        Ok(Self {
            voters,
            candidates,
            table,
            approval,
            ordinal: OnceCell::new(),
            cardinal: OnceCell::new(),
            ordinal_seed: derive_seed(master, "ordinal", &ctx),
            dd,
        })
    }

    fn ballots(&self, form: BallotForm) -> &ElectoralBallots {
        match form {
            BallotForm::Approval => &self.approval,
            BallotForm::Ordinal => self.ordinal.get_or_init(|| {
                let mut rng = rng_from_seed(self.ordinal_seed);
                ElectoralBallots::Ordinal(OrdinalBallots::from_table(&self.table, &mut rng))
            }),
            BallotForm::Cardinal => self
                .cardinal
                .get_or_init(|| ElectoralBallots::Cardinal(CardinalBallots::from_table(&self.table))),
        }
    }
}

/// A committee elected at one `(k, rule)` together with its per-trial
/// quantities that do not depend on delegation.
struct Elected {
    committee: Committee,
    rd: DecisionRecord,
    stats: crate::model::CommitteeStats,
    draws: Vec<DelegationDraw>,
}

fn elect(spec: &ExperimentSpec, inst: &Instance, ctx: [u64; 4], k: usize, rule: RuleKind) -> Result<Elected> {
    let [n, m, r, trial] = ctx;
    let parts = [n, m, r, k as u64, rule.id(), trial];
    let ballots = match rule.required_form() {
        Some(form) => inst.ballots(form),
        None => &inst.approval,
    };
    let mut rng = rng_from_seed(derive_seed(spec.master_seed, "election", &parts));
    let committee = ElectionRule::new(rule, k)?.elect(ballots, &inst.candidates, &mut rng)?;
    let rd = rd_outcome(&committee);
    let stats = committee_stats(&inst.voters, &committee)?;
    let mut rng = rng_from_seed(derive_seed(spec.master_seed, "delegation", &parts));
    let draws = (0..r).map(|_| DelegationDraw::new(n as usize, &mut rng)).collect();
    Ok(Elected {
        committee,
        rd,
        stats,
        draws,
    })
}

fn scheme_ballots(inst: &Instance, kind: SchemeKind) -> Option<&ElectoralBallots> {
    match kind {
        SchemeKind::Approve => Some(inst.ballots(BallotForm::Approval)),
        SchemeKind::Best1 | SchemeKind::Best3 => Some(inst.ballots(BallotForm::Ordinal)),
        SchemeKind::None | SchemeKind::Optimal => None,
    }
}

fn evaluate(
    spec: &ExperimentSpec,
    inst: &Instance,
    elected: &Elected,
    scheme: &PreparedScheme,
    key: &CellKey,
    trial: usize,
) -> Result<(TrialRecord, DecisionRecord)> {
    let parts = [
        key.n_voters as u64,
        key.n_candidates as u64,
        key.n_issues as u64,
        key.k as u64,
        key.rule.id(),
        key.scheme.id(),
        key.alpha.to_bits(),
        trial as u64,
    ];
    let seed = derive_seed(spec.master_seed, "decision", &parts);
    let committee = &elected.committee;
    let voters = &inst.voters;
    let masses = elected
        .draws
        .iter()
        .enumerate()
        .map(|(issue, draw)| {
            let delegators = match spec.minority_alpha {
                Some(minority) => {
                    let side: Vec<bool> = (0..voters.n_agents()).map(|j| voters.get(j, issue)).collect();
                    draw.delegators_by_side(&side, key.alpha, minority)?
                }
                None => draw.delegators(key.alpha, spec.delegator_sampling)?,
            };
            scheme.mass(issue, voters, committee, &delegators)
        })
        .collect::<Result<Vec<_>>>()?;
    let frd = frd_from_masses(masses, voters.n_agents(), &mut rng_from_seed(seed));
    let stats = &elected.stats;
    let record = TrialRecord {
        trial,
        agreement_rd: agreement(&inst.dd.outcome.decisions, &elected.rd.outcome.decisions)?,
        agreement_frd: agreement(&inst.dd.outcome.decisions, &frd.outcome.decisions)?,
        coverage: stats.coverage_fraction(),
        full_coverage: stats.full_coverage_fraction(),
        majority_agreement: stats.majority_agreement_fraction(),
        frd_ties: frd.tie_count,
        seed,
    };
    Ok((record, frd))
}

/// Runs every cell at one `(N, m, r, trial)`. Cells sharing `(k, rule)` must
/// be adjacent to reuse the elected committee.
fn run_context(spec: &ExperimentSpec, ctx: [u64; 4], cells: &[(usize, CellKey)]) -> Result<Vec<(usize, TrialRecord)>> {
    let inst = Instance::new(spec.master_seed, ctx)?;
    let trial = ctx[3] as usize;
    let mut out = Vec::with_capacity(cells.len());
    let mut elected: Option<((usize, RuleKind), Elected)> = None;
    let mut prepared: Option<PreparedScheme> = None;
    for (idx, key) in cells {
        let group = (key.k, key.rule);
        if elected.as_ref().is_none_or(|(g, _)| *g != group) {
            elected = Some((group, elect(spec, &inst, ctx, key.k, key.rule)?));
            prepared = None;
        }
        let (_, e) = elected.as_ref().unwrap();
        if prepared.as_ref().is_none_or(|p| p.kind() != key.scheme) {
            prepared = Some(PreparedScheme::new(
                key.scheme,
                &e.committee,
                scheme_ballots(&inst, key.scheme),
            )?);
        }
        out.push((
            *idx,
            evaluate(spec, &inst, e, prepared.as_ref().unwrap(), key, trial)?.0,
        ));
    }
    Ok(out)
}

/// One trial of one cell. Produces the same record as the grid run.
pub fn run_trial(spec: &ExperimentSpec, key: &CellKey, trial: usize) -> Result<TrialRecord> {
    spec.validate()?;
    let ctx = [
        key.n_voters as u64,
        key.n_candidates as u64,
        key.n_issues as u64,
        trial as u64,
    ];
    Ok(run_context(spec, ctx, &[(0, *key)])?.remove(0).1)
}

/// Everything decided in one trial of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDecisions {
    /// Elected candidate indices in election order.
    pub committee: Vec<usize>,
    pub dd: DecisionRecord,
    pub rd: DecisionRecord,
    pub frd: DecisionRecord,
    pub record: TrialRecord,
}

pub fn trial_decisions(spec: &ExperimentSpec, key: &CellKey, trial: usize) -> Result<TrialDecisions> {
    spec.validate()?;
    let ctx = [
        key.n_voters as u64,
        key.n_candidates as u64,
        key.n_issues as u64,
        trial as u64,
    ];
    let inst = Instance::new(spec.master_seed, ctx)?;
    let e = elect(spec, &inst, ctx, key.k, key.rule)?;
    let scheme = PreparedScheme::new(key.scheme, &e.committee, scheme_ballots(&inst, key.scheme))?;
    let (record, frd) = evaluate(spec, &inst, &e, &scheme, key, trial)?;
    Ok(TrialDecisions {
        committee: e.committee.members().to_vec(),
        dd: inst.dd.clone(),
        rd: e.rd.clone(),
        frd,
        record,
    })
}

/// Worker count requested through [`THREADS_ENV`], if any.
pub fn thread_count_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

pub fn run_grid(spec: &ExperimentSpec) -> Result<Vec<CellResult>> {
    run_grid_with_threads(spec, thread_count_from_env())
}

/// Runs every cell for every trial. Results do not depend on `threads`.
pub fn run_grid_with_threads(spec: &ExperimentSpec, threads: Option<usize>) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let cells = spec.cells();
    // (n, m, r, trial) and the cells sharing that instance.
    type Context = ([u64; 4], Vec<(usize, CellKey)>);
    let mut contexts: Vec<Context> = Vec::new();
    for &n in &spec.n_voters {
        for &m in &spec.n_candidates {
            for &r in &spec.n_issues {
                let members: Vec<(usize, CellKey)> = cells
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| (c.n_voters, c.n_candidates, c.n_issues) == (n, m, r))
                    .map(|(i, c)| (i, *c))
                    .collect();
                for trial in 0..spec.trials {
                    contexts.push(([n as u64, m as u64, r as u64, trial as u64], members.clone()));
                }
            }
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| FrdError::Precondition(format!("cannot start worker pool: {e}")))?;
    let batches: Vec<Vec<(usize, TrialRecord)>> = pool.install(|| {
        contexts
            .par_iter()
            .map(|(ctx, members)| run_context(spec, *ctx, members))
            .collect::<Result<_>>()
    })?;
    let mut per_cell: Vec<Vec<TrialRecord>> = vec![Vec::with_capacity(spec.trials); cells.len()];
    for (idx, record) in batches.into_iter().flatten() {
        per_cell[idx].push(record);
    }
    Ok(cells
        .into_iter()
        .zip(per_cell)
        .map(|(key, mut records)| {
            records.sort_by_key(|r| r.trial);
            CellResult::new(spec.preset.clone(), key, records)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SchemeGrid;

    fn spec(rules: Vec<RuleKind>, scheme: Vec<SchemeGrid>, trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            preset: "test".into(),
            n_voters: vec![21],
            n_candidates: vec![9],
            n_issues: vec![12],
            k: vec![3, 5],
            rule: rules,
            scheme,
            trials,
            master_seed: 11,
            delegator_sampling: Default::default(),
            minority_alpha: None,
        }
    }

    #[test]
    fn generated_profiles_are_canonical_and_reproducible() {
        let (v, c) = generate_profiles(31, 7, 40, &mut rng_from_seed(3)).unwrap();
        assert!(v.column_ones().iter().all(|&ones| 2 * ones > 31));
        let (v2, c2) = generate_profiles(31, 7, 40, &mut rng_from_seed(3)).unwrap();
        assert_eq!((v, c), (v2, c2));
    }

    #[test]
    fn raw_entries_are_fair_coins() {
        let mut rng = rng_from_seed(8);
        let p = IssueProfile::random(1000, 1000, &mut rng).unwrap();
        let ones: usize = p.column_ones().iter().sum();
        let sigma = (1e6f64 * 0.25).sqrt();
        assert!((ones as f64 - 5e5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn grid_is_deterministic_across_thread_counts() {
        let s = spec(
            RuleKind::ALL.to_vec(),
            vec![SchemeGrid {
                kind: SchemeKind::Optimal,
                alpha: vec![0.0, 0.5, 1.0],
            }],
            3,
        );
        let a = run_grid_with_threads(&s, Some(1)).unwrap();
        let b = run_grid_with_threads(&s, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8 * 2 * 3);
        assert!(a.iter().all(|c| c.records.len() == 3));
        let key = a[7].key;
        assert_eq!(run_trial(&s, &key, 2).unwrap(), a[7].records[2]);
        let d = trial_decisions(&s, &key, 2).unwrap();
        assert_eq!(d.record, a[7].records[2]);
        assert_eq!(d.committee.len(), key.k);
        assert_eq!(d.frd.outcome.len(), key.n_issues);
    }

    #[test]
    fn no_delegation_equals_rd_and_full_optimal_delegation_reaches_coverage() {
        let s = spec(
            vec![RuleKind::Av, RuleKind::Sortition],
            vec![
                SchemeGrid {
                    kind: SchemeKind::None,
                    alpha: vec![0.7],
                },
                SchemeGrid {
                    kind: SchemeKind::Optimal,
                    alpha: vec![1.0],
                },
            ],
            4,
        );
        for cell in run_grid_with_threads(&s, Some(1)).unwrap() {
            for r in &cell.records {
                match cell.key.scheme {
                    SchemeKind::None => assert_eq!(r.agreement_frd, r.agreement_rd),
                    _ => assert_eq!(r.agreement_frd, r.coverage),
                }
                assert_eq!(r.frd_ties, 0);
            }
        }
    }

    #[test]
    fn fixed_schemes_run_with_both_samplings() {
        let mut s = spec(
            vec![RuleKind::Stv],
            vec![
                SchemeGrid {
                    kind: SchemeKind::Approve,
                    alpha: vec![0.0, 1.0],
                },
                SchemeGrid {
                    kind: SchemeKind::Best3,
                    alpha: vec![0.0, 1.0],
                },
            ],
            2,
        );
        s.delegator_sampling = crate::delegation::DelegatorSampling::ExactCount;
        let cells = run_grid_with_threads(&s, Some(1)).unwrap();
        for c in cells.iter().filter(|c| c.key.alpha == 0.0) {
            assert_eq!(c.mean_agreement, c.mean_agreement_rd);
        }
        s.delegator_sampling = Default::default();
        s.minority_alpha = Some(0.0);
        assert!(run_grid_with_threads(&s, Some(1)).is_ok());
    }

    #[test]
    fn minority_only_delegation_cannot_help() {
        let mut s = spec(
            vec![RuleKind::Av],
            vec![SchemeGrid {
                kind: SchemeKind::Optimal,
                alpha: vec![0.0],
            }],
            3,
        );
        s.minority_alpha = Some(1.0);
        for c in run_grid_with_threads(&s, Some(1)).unwrap() {
            for r in &c.records {
                assert!(r.agreement_frd <= r.agreement_rd);
            }
        }
    }
}
