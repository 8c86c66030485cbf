//! Experiment orchestration: grid specifications, seeded trial execution,
//! aggregation and output.
//!
//! Randomness is split into independent streams keyed by the grid
//! coordinates that influence them. Every rule and delegation scheme at the
//! same `(N, m, r, trial)` sees the same preference profiles, and every
//! delegation rate thresholds the same per-voter uniforms, so differences
//! between cells are not drowned in instance noise.

mod output;
mod plot;
mod presets;
mod run;

pub use output::{emit_csv, write_csv, CSV_HEADER};
pub use plot::emit_plot;
pub use presets::{figure_preset, PRESET_NAMES};
pub use run::{
    generate_profiles, run_grid, run_grid_with_threads, run_trial, thread_count_from_env, trial_decisions,
    TrialDecisions, THREADS_ENV,
};

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize};

use crate::delegation::{check_probability, DelegatorSampling, SchemeKind};
use crate::election::RuleKind;
use crate::error::{FrdError, Result};

fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// A delegation scheme with one or more delegation rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeGrid {
    pub kind: SchemeKind,
    #[serde(deserialize_with = "one_or_many", default = "zero_alpha")]
    pub alpha: Vec<f64>,
}

fn zero_alpha() -> Vec<f64> {
    vec![0.0]
}

fn no_delegation() -> Vec<SchemeGrid> {
    vec![SchemeGrid {
        kind: SchemeKind::None,
        alpha: zero_alpha(),
    }]
}

/// Every axis accepts a single value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Label written to the `preset` CSV column.
    #[serde(default = "custom_label")]
    pub preset: String,
    #[serde(deserialize_with = "one_or_many")]
    pub n_voters: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub n_candidates: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub n_issues: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub k: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub rule: Vec<RuleKind>,
    #[serde(deserialize_with = "one_or_many", default = "no_delegation")]
    pub scheme: Vec<SchemeGrid>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub delegator_sampling: DelegatorSampling,
    /// Separate delegation rate for voters in each issue's minority; the
    /// scheme's `alpha` then applies to the majority only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minority_alpha: Option<f64>,
}

fn custom_label() -> String {
    "custom".into()
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FrdError::InvalidSpec(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        for (name, empty) in [
            ("n_voters", self.n_voters.is_empty()),
            ("n_candidates", self.n_candidates.is_empty()),
            ("n_issues", self.n_issues.is_empty()),
            ("k", self.k.is_empty()),
            ("rule", self.rule.is_empty()),
            ("scheme", self.scheme.is_empty()),
        ] {
            if empty {
                return bad(format!("axis {name} is empty"));
            }
        }
        for (name, axis) in [
            ("n_voters", &self.n_voters),
            ("n_candidates", &self.n_candidates),
            ("n_issues", &self.n_issues),
        ] {
            if axis.contains(&0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if let Some(&k) = self.k.iter().find(|&&k| k % 2 == 0) {
            return bad(format!("committee size must be odd, got {k}"));
        }
        let max_k = *self.k.iter().max().unwrap();
        if let Some(&m) = self.n_candidates.iter().find(|&&m| m < max_k) {
            return bad(format!("k = {max_k} exceeds n_candidates = {m}"));
        }
        for s in &self.scheme {
            if s.alpha.is_empty() {
                return bad(format!("scheme {} has no alpha values", s.kind));
            }
            for &a in &s.alpha {
                check_probability(a).map_err(|_| FrdError::InvalidSpec(format!("alpha {a} is outside [0, 1]")))?;
            }
            if let Some(best) = s.kind.best_count() {
                if let Some(&k) = self.k.iter().find(|&&k| k < best) {
                    return bad(format!("scheme {} needs k >= {best}, got {k}", s.kind));
                }
            }
        }
        if let Some(a) = self.minority_alpha {
            check_probability(a).map_err(|_| FrdError::InvalidSpec(format!("minority_alpha {a} is outside [0, 1]")))?;
            if self.delegator_sampling != DelegatorSampling::Bernoulli {
                return bad("minority_alpha requires bernoulli delegator sampling".into());
            }
        }
        Ok(())
    }

    /// All grid cells in output order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &n_voters in &self.n_voters {
            for &n_candidates in &self.n_candidates {
                for &n_issues in &self.n_issues {
                    for &k in &self.k {
                        for &rule in &self.rule {
                            for s in &self.scheme {
                                for &alpha in &s.alpha {
                                    out.push(CellKey {
                                        n_voters,
                                        n_candidates,
                                        n_issues,
                                        k,
                                        rule,
                                        scheme: s.kind,
                                        alpha,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Coordinates of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellKey {
    pub n_voters: usize,
    pub n_candidates: usize,
    pub n_issues: usize,
    pub k: usize,
    pub rule: RuleKind,
    pub scheme: SchemeKind,
    pub alpha: f64,
}

/// Outcome of one trial at one cell. Fractions are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub agreement_rd: Ratio<u64>,
    pub agreement_frd: Ratio<u64>,
    pub coverage: Ratio<u64>,
    pub full_coverage: Ratio<u64>,
    pub majority_agreement: Ratio<u64>,
    pub frd_ties: usize,
    /// Seed of the trial's decision stream; identifies the trial.
    pub seed: u64,
}

/// Aggregates over the trials of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub preset: String,
    pub key: CellKey,
    pub records: Vec<TrialRecord>,
    /// Mean FRD agreement (equal to RD agreement without delegation).
    pub mean_agreement: f64,
    /// Sample variance of the FRD agreement.
    pub variance: f64,
    pub sem: f64,
    pub mean_agreement_rd: f64,
    pub variance_rd: f64,
    pub mean_coverage: f64,
    pub mean_full_coverage: f64,
    pub mean_majority_agreement: f64,
}

fn f(r: &Ratio<u64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

impl CellResult {
    pub fn new(preset: String, key: CellKey, records: Vec<TrialRecord>) -> Self {
        let (mean_agreement, variance) = mean_var(records.iter().map(|r| f(&r.agreement_frd)));
        let (mean_agreement_rd, variance_rd) = mean_var(records.iter().map(|r| f(&r.agreement_rd)));
        let avg =
            |g: fn(&TrialRecord) -> &Ratio<u64>| records.iter().map(|r| f(g(r))).sum::<f64>() / records.len() as f64;
        Self {
            mean_coverage: avg(|r| &r.coverage),
            mean_full_coverage: avg(|r| &r.full_coverage),
            mean_majority_agreement: avg(|r| &r.majority_agreement),
            sem: (variance / records.len() as f64).sqrt(),
            preset,
            key,
            mean_agreement,
            variance,
            mean_agreement_rd,
            variance_rd,
            records,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_accepts_scalars_and_lists() {
        let spec: ExperimentSpec = serde_json::from_str(
            r#"{"n_voters": 11, "n_candidates": [7, 9], "n_issues": 5, "k": [3, 5], "rule": "av",
                "scheme": {"kind": "optimal", "alpha": [0.0, 0.5]}, "trials": 2, "master_seed": 1}"#,
        )
        .unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.cells().len(), 2 * 2 * 2);
        assert_eq!(spec.delegator_sampling, DelegatorSampling::Bernoulli);
        let plain: ExperimentSpec = serde_json::from_str(
            r#"{"n_voters": 11, "n_candidates": 7, "n_issues": 5, "k": 3, "rule": ["stv", "sortition"],
                "trials": 1, "master_seed": 0, "delegator_sampling": "exact_count"}"#,
        )
        .unwrap();
        assert_eq!(plain.scheme, no_delegation());
        assert_eq!(plain.delegator_sampling, DelegatorSampling::ExactCount);
    }

    #[test]
    fn spec_validation_errors() {
        let base = r#""n_voters": 11, "n_candidates": 7, "n_issues": 5, "rule": "av", "master_seed": 0"#;
        for extra in [
            r#""k": 4, "trials": 1"#,
            r#""k": 9, "trials": 1"#,
            r#""k": 3, "trials": 0"#,
            r#""k": [], "trials": 1"#,
            r#""k": 1, "trials": 1, "scheme": {"kind": "best3", "alpha": 0.5}"#,
            r#""k": 3, "trials": 1, "scheme": {"kind": "approve", "alpha": 1.5}"#,
        ] {
            let spec: ExperimentSpec = serde_json::from_str(&format!("{{{base}, {extra}}}")).unwrap();
            assert!(matches!(spec.validate(), Err(FrdError::InvalidSpec(_))), "{extra}");
        }
        assert!(
            serde_json::from_str::<ExperimentSpec>(&format!("{{{base}, \"k\": 3, \"trials\": 1, \"bogus\": 1}}"))
                .is_err()
        );
    }

    #[test]
    fn single_trial_has_zero_variance() {
        let key = CellKey {
            n_voters: 1,
            n_candidates: 1,
            n_issues: 2,
            k: 1,
            rule: RuleKind::Av,
            scheme: SchemeKind::None,
            alpha: 0.0,
        };
        let rec = TrialRecord {
            trial: 0,
            agreement_rd: Ratio::new(1, 2),
            agreement_frd: Ratio::new(1, 2),
            coverage: Ratio::new(1, 1),
            full_coverage: Ratio::new(0, 1),
            majority_agreement: Ratio::new(1, 2),
            frd_ties: 0,
            seed: 0,
        };
        let cell = CellResult::new("t".into(), key, vec![rec.clone()]);
        assert_eq!((cell.mean_agreement, cell.variance, cell.sem), (0.5, 0.0, 0.0));
        let two = CellResult::new(
            "t".into(),
            key,
            vec![
                rec.clone(),
                TrialRecord {
                    agreement_frd: Ratio::new(1, 1),
                    ..rec
                },
            ],
        );
        assert!((two.variance - 0.125).abs() < 1e-12);
    }
}
