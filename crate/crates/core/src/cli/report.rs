//! Tables and plot data from result files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::analysis::SweepResults;
use crate::harness::output::{csv_bytes, write_all, SUMMARY_JSON};
use crate::harness::{CurveStats, Summary};
use crate::wrappers::LearnerKind;

pub const SWEEP_FILE: &str = "sweep.json";

/// Reads `summary.json` and/or `sweep.json` from `input` and writes the
/// derived files into `out`. Everything is rendered before anything is
/// written, so a failure leaves no partial output.
pub fn emit_report(input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let summary_path = input.join(SUMMARY_JSON);
    let sweep_path = input.join(SWEEP_FILE);
    if !summary_path.exists() && !sweep_path.exists() {
        return Err(Error::MissingResults(format!(
            "{} holds neither {SUMMARY_JSON} nor {SWEEP_FILE}",
            input.display()
        )));
    }
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    if summary_path.exists() {
        let summary = Summary::read(&summary_path)?;
        let ordered = table_order(&summary.learners);
        if ordered.is_empty() {
            return Err(Error::MissingResults(format!("{} lists no learners", summary_path.display())));
        }
        files.push(("summary_table.txt".into(), table_text(&summary, &ordered).into_bytes()));
        files.push(("summary_table.csv".into(), table_csv(&ordered)?));
        for s in &ordered {
            files.push((format!("curve_{}.csv", s.learner.id()), curve_csv(&summary, s)?));
        }
    }
    if sweep_path.exists() {
        let text = std::fs::read_to_string(&sweep_path)?;
        let sweep: SweepResults = serde_json::from_str(&text)?;
        files.push(("sweep_surface.csv".into(), sweep_csv(&sweep)?));
    }
    let named: Vec<(&str, Vec<u8>)> = files.iter().map(|(n, b)| (n.as_str(), b.clone())).collect();
    write_all(out, &named)?;
    Ok(files.into_iter().map(|(n, _)| out.join(n)).collect())
}

fn table_order(stats: &[CurveStats]) -> Vec<&CurveStats> {
    LearnerKind::ALL
        .iter()
        .filter_map(|k| stats.iter().find(|s| s.learner == *k))
        .collect()
}

fn best_fraction(rows: &[&CurveStats]) -> f64 {
    rows.iter().map(|s| s.fraction_mean).fold(f64::INFINITY, f64::min)
}

fn table_text(summary: &Summary, rows: &[&CurveStats]) -> String {
    let best = best_fraction(rows);
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{} ({}, {} runs, {} rounds)",
        summary.name, summary.source, summary.runs, summary.rounds
    );
    let _ = writeln!(t, "{:<8}{:<20}{:<20}", "learner", "AULC", "Fraction");
    for s in rows {
        let aulc = format!("{:.3} ({:.3})", s.aulc_mean, s.aulc_std);
        let frac = format!("{:.3} ({:.3})", s.fraction_mean, s.fraction_std);
        let mark = if s.fraction_mean == best { " *" } else { "" };
        let _ = writeln!(t, "{:<8}{:<20}{}{}", s.learner.label(), aulc, frac, mark);
    }
    t.push_str("* best monotonicity\n");
    t
}

fn table_csv(rows: &[&CurveStats]) -> Result<Vec<u8>> {
    let best = best_fraction(rows);
    csv_bytes(
        &["learner", "aulc_mean", "aulc_std", "fraction_mean", "fraction_std", "best_monotonicity"],
        rows.iter().map(|s| {
            vec![
                s.learner.id().to_string(),
                s.aulc_mean.to_string(),
                s.aulc_std.to_string(),
                s.fraction_mean.to_string(),
                s.fraction_std.to_string(),
                (s.fraction_mean == best).to_string(),
            ]
        }),
    )
}

fn curve_csv(summary: &Summary, s: &CurveStats) -> Result<Vec<u8>> {
    csv_bytes(
        &["round", "training_size", "mean_error", "std_error"],
        s.mean_curve.iter().zip(&s.std_curve).enumerate().map(|(i, (m, sd))| {
            vec![
                (i + 1).to_string(),
                summary.training_sizes.get(i).map_or(String::new(), |n| n.to_string()),
                m.to_string(),
                sd.to_string(),
            ]
        }),
    )
}

fn sweep_csv(sweep: &SweepResults) -> Result<Vec<u8>> {
    let rows = sweep.cells.iter().flat_map(|cell| {
        cell.stats.iter().map(move |s| {
            let fraction = if s.fraction_mean == 0.0 {
                "zero".to_string()
            } else {
                s.fraction_mean.to_string()
            };
            vec![
                cell.alpha.to_string(),
                cell.nv.to_string(),
                s.learner.id().to_string(),
                s.aulc_mean.to_string(),
                fraction,
            ]
        })
    });
    csv_bytes(&["alpha", "nv", "learner", "aulc", "fraction"], rows)
}
