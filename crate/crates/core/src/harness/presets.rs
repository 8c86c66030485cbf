use super::{ExperimentSpec, SchemeGrid};
use crate::delegation::{DelegatorSampling, SchemeKind};
use crate::election::RuleKind;
use crate::error::{FrdError, Result};

pub const PRESET_NAMES: [&str; 5] = ["fig1a", "fig1b", "fig1c", "fig2", "fig3"];

const TRIALS: usize = 50;

const LARGE_RULES: [RuleKind; 6] = [
    RuleKind::Av,
    RuleKind::Rav,
    RuleKind::Stv,
    RuleKind::Borda,
    RuleKind::Weighted,
    RuleKind::Sortition,
];

fn base(name: &str, n: usize, m: Vec<usize>, r: Vec<usize>, k: Vec<usize>, rule: Vec<RuleKind>) -> ExperimentSpec {
    ExperimentSpec {
        preset: name.into(),
        n_voters: vec![n],
        n_candidates: m,
        n_issues: r,
        k,
        rule,
        scheme: vec![SchemeGrid {
            kind: SchemeKind::None,
            alpha: vec![0.0],
        }],
        trials: TRIALS,
        master_seed: 0,
        delegator_sampling: DelegatorSampling::Bernoulli,
        minority_alpha: None,
    }
}

/// The named experiment with 50 trials and master seed 0.
///
/// * `fig1a`: N=501, m=60, k=21, r in 15..=150 step 15.
/// * `fig1b`: N=501, r=150, k=21, m in 21..=96 step 5, then 100.
/// * `fig1c`: N=501, m=100, r=150, k in 21..=91 step 10.
/// * `fig2`: N=51, m=17, r=80, odd k in 3..=15, all eight rules.
/// * `fig3`: N=301, m=60, r=150, k=21, weighted rule, the four delegation
///   schemes at alpha = 0.00, 0.01, ..., 1.00.
pub fn figure_preset(name: &str) -> Result<ExperimentSpec> {
    let large = LARGE_RULES.to_vec();
    Ok(match name {
        "fig1a" => base(name, 501, vec![60], (15..=150).step_by(15).collect(), vec![21], large),
        "fig1b" => {
            let mut m: Vec<usize> = (21..=96).step_by(5).collect();
            m.push(100);
            base(name, 501, m, vec![150], vec![21], large)
        }
        "fig1c" => base(name, 501, vec![100], vec![150], (21..=91).step_by(10).collect(), large),
        "fig2" => base(
            name,
            51,
            vec![17],
            vec![80],
            (3..=15).step_by(2).collect(),
            RuleKind::ALL.to_vec(),
        ),
        "fig3" => {
            let alpha: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
            let mut spec = base(name, 301, vec![60], vec![150], vec![21], vec![RuleKind::Weighted]);
            spec.scheme = [
                SchemeKind::Optimal,
                SchemeKind::Approve,
                SchemeKind::Best1,
                SchemeKind::Best3,
            ]
            .into_iter()
            .map(|kind| SchemeGrid {
                kind,
                alpha: alpha.clone(),
            })
            .collect();
            spec
        }
        other => return Err(FrdError::UnknownPreset(other.into())),
    })
}
