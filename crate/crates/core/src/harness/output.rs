use std::fs::File;
use std::io::Write;
use std::path::Path;

use num_rational::Ratio;
use num_traits::ToPrimitive;

use super::CellResult;
use crate::error::Result;

pub const CSV_HEADER: [&str; 15] = [
    "preset",
    "rule",
    "scheme",
    "alpha",
    "n_voters",
    "n_candidates",
    "n_issues",
    "k",
    "trial",
    "agreement_rd",
    "agreement_frd",
    "coverage",
    "full_coverage",
    "majority_agreement",
    "seed",
];

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

fn frac(r: &Ratio<u64>) -> String {
    fixed(r.to_f64().unwrap_or(f64::NAN))
}

/// One row per trial, in cell then trial order.
pub fn write_csv<W: Write>(results: &[CellResult], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for cell in results {
        let key = &cell.key;
        for rec in &cell.records {
            w.write_record([
                cell.preset.clone(),
                key.rule.name().into(),
                key.scheme.name().into(),
                fixed(key.alpha),
                key.n_voters.to_string(),
                key.n_candidates.to_string(),
                key.n_issues.to_string(),
                key.k.to_string(),
                rec.trial.to_string(),
                frac(&rec.agreement_rd),
                frac(&rec.agreement_frd),
                frac(&rec.coverage),
                frac(&rec.full_coverage),
                frac(&rec.majority_agreement),
                rec.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(results: &[CellResult], path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(File::create(path)?);
    write_csv(results, file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::RuleKind;
    use crate::harness::{run_grid_with_threads, ExperimentSpec};

    #[test]
    fn empty_results_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn one_row_per_trial_with_fixed_decimals() {
        let spec: ExperimentSpec = serde_json::from_value(serde_json::json!({
            "preset": "t", "n_voters": 9, "n_candidates": 5, "n_issues": [3, 4], "k": 3,
            "rule": [RuleKind::Av, RuleKind::Borda], "trials": 3, "master_seed": 5
        }))
        .unwrap();
        let results = run_grid_with_threads(&spec, Some(1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&results, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 2 * 3);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(&fields[..4], &["t", "av", "none", "0.000000"]);
        assert_eq!(fields[9].split('.').nth(1).unwrap().len(), 6);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_csv(&results, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    }
}
