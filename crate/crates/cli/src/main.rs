use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use frdlab_core::analysis::{chernoff_sweep, coverage_sweep, parity_sweep, threshold_sweep, SweepReport};
use frdlab_core::decide::DecisionRecord;
use frdlab_core::harness::{
    emit_csv, emit_plot, figure_preset, run_grid, trial_decisions, write_csv, CellKey, ExperimentSpec, SchemeGrid,
    PRESET_NAMES,
};
use frdlab_core::{DelegatorSampling, FrdError, RuleKind, SchemeKind};

const EXIT_SPEC: u8 = 2;
const EXIT_ORACLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "frdlab",
    version,
    about = "Simulate direct, representative and flexible representative democracy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and print the DD, RD and FRD decisions as JSON.
    Single {
        #[arg(long, default_value_t = 51)]
        voters: usize,
        #[arg(long, default_value_t = 17)]
        candidates: usize,
        #[arg(long, default_value_t = 20)]
        issues: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value = "weighted")]
        rule: RuleKind,
        #[arg(long, default_value = "optimal")]
        scheme: SchemeKind,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Run a JSON experiment spec and write one CSV row per trial.
    Grid {
        #[arg(long)]
        spec: PathBuf,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional SVG chart of the cell means.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run a named figure preset and write `<name>.csv` and `<name>.svg`.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run an analysis sweep and report pass or fail.
    Oracle {
        #[arg(long)]
        mode: OracleMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides the number of random instances or scenarios.
        #[arg(long)]
        cases: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Coverage,
    Thresholds,
    Chernoff,
    Parity,
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn record_json(r: &DecisionRecord) -> Value {
    json!({
        "outcome": bits(&r.outcome.decisions),
        "tie_count": r.tie_count,
        "x1": r.x1.as_ref().map(|x| x.iter().map(|v| v.to_string()).collect::<Vec<_>>()),
    })
}

fn single(key: CellKey, seed: u64, trial: usize) -> anyhow::Result<()> {
    let spec = ExperimentSpec {
        preset: "single".into(),
        n_voters: vec![key.n_voters],
        n_candidates: vec![key.n_candidates],
        n_issues: vec![key.n_issues],
        k: vec![key.k],
        rule: vec![key.rule],
        scheme: vec![SchemeGrid {
            kind: key.scheme,
            alpha: vec![key.alpha],
        }],
        trials: trial + 1,
        master_seed: seed,
        delegator_sampling: DelegatorSampling::Bernoulli,
        minority_alpha: None,
    };
    let d = trial_decisions(&spec, &key, trial)?;
    let r = &d.record;
    let out = json!({
        "cell": key,
        "trial": trial,
        "seed": r.seed,
        "committee": d.committee,
        "dd": record_json(&d.dd),
        "rd": record_json(&d.rd),
        "frd": record_json(&d.frd),
        "agreement_rd": r.agreement_rd.to_string(),
        "agreement_frd": r.agreement_frd.to_string(),
        "coverage": r.coverage.to_string(),
        "full_coverage": r.full_coverage.to_string(),
        "majority_agreement": r.majority_agreement.to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn grid(spec: PathBuf, out: Option<PathBuf>, plot: Option<PathBuf>) -> anyhow::Result<()> {
    let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
    let spec: ExperimentSpec =
        serde_json::from_str(&text).map_err(|e| FrdError::InvalidSpec(format!("{}: {e}", spec.display())))?;
    let results = run_grid(&spec)?;
    match out {
        Some(path) => emit_csv(&results, &path)?,
        None => write_csv(&results, std::io::stdout().lock())?,
    }
    if let Some(path) = plot {
        emit_plot(&results, &path)?;
    }
    Ok(())
}

fn figure(name: &str, out: PathBuf, seed: u64, trials: Option<usize>) -> anyhow::Result<()> {
    let mut spec = figure_preset(name)?;
    spec.master_seed = seed;
    if let Some(t) = trials {
        spec.trials = t;
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let results = run_grid(&spec)?;
    let csv = out.join(format!("{name}.csv"));
    let svg = out.join(format!("{name}.svg"));
    emit_csv(&results, &csv)?;
    emit_plot(&results, &svg)?;
    println!("{}", csv.display());
    println!("{}", svg.display());
    Ok(())
}

fn oracle(mode: OracleMode, seed: u64, cases: Option<u64>) -> anyhow::Result<SweepReport> {
    Ok(match mode {
        OracleMode::Coverage => coverage_sweep(cases.unwrap_or(200), seed)?,
        OracleMode::Thresholds => threshold_sweep(9, 5)?,
        OracleMode::Chernoff => chernoff_sweep(cases.unwrap_or(20), 10_000, seed)?,
        OracleMode::Parity => parity_sweep(cases.unwrap_or(100_000), seed)?,
    })
}

fn is_spec_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<FrdError>(),
        Some(
            FrdError::InvalidSpec(_)
                | FrdError::UnknownPreset(_)
                | FrdError::InvalidCommitteeSize(_)
                | FrdError::CommitteeTooLarge { .. }
                | FrdError::InvalidProbability(_)
                | FrdError::EnumerationTooLarge { .. }
        )
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Single {
            voters,
            candidates,
            issues,
            k,
            rule,
            scheme,
            alpha,
            seed,
            trial,
        } => single(
            CellKey {
                n_voters: voters,
                n_candidates: candidates,
                n_issues: issues,
                k,
                rule,
                scheme,
                alpha,
            },
            seed,
            trial,
        ),
        Command::Grid { spec, out, plot } => grid(spec, out, plot),
        Command::Figure {
            name,
            out,
            seed,
            trials,
        } => figure(&name, out, seed, trials),
        Command::Oracle { mode, seed, cases } => match oracle(mode, seed, cases) {
            Ok(report) => {
                println!("{report}");
                return if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_ORACLE)
                };
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_spec_error(&e) {
                ExitCode::from(EXIT_SPEC)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
