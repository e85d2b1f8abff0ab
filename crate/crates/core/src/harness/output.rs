//! Result files.

use std::fs;
use std::path::Path;

use super::experiment::{ExperimentResults, Summary};
use crate::error::Result;

pub const ROUNDS_FILE: &str = "rounds.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSON: &str = "summary.json";

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Per-round records of every run and learner.
pub fn rounds_csv(results: &ExperimentResults) -> Result<Vec<u8>> {
    let rows = results.runs.iter().flatten().flat_map(|r| {
        r.decisions.iter().zip(&r.errors).map(move |(d, e)| {
            vec![
                r.run.to_string(),
                r.learner.id().to_string(),
                d.round.to_string(),
                e.to_string(),
                d.update.to_string(),
                opt(d.p_value),
                opt(d.candidate_val_error),
                opt(d.incumbent_val_error),
            ]
        })
    });
    csv_bytes(
        &[
            "run",
            "learner",
            "round",
            "true_error",
            "update",
            "p_value",
            "val_error_candidate",
            "val_error_incumbent",
        ],
        rows,
    )
}

pub fn summary_csv(summary: &Summary) -> Result<Vec<u8>> {
    let rows = summary.learners.iter().map(|s| {
        vec![
            s.learner.id().to_string(),
            s.aulc_mean.to_string(),
            s.aulc_std.to_string(),
            s.fraction_mean.to_string(),
            s.fraction_std.to_string(),
        ]
    });
    csv_bytes(&["learner", "aulc_mean", "aulc_std", "fraction_mean", "fraction_std"], rows)
}

/// Writes `rounds.csv`, `summary.csv` and `summary.json` into `dir`.
pub fn write_results(dir: &Path, results: &ExperimentResults) -> Result<()> {
    let summary = Summary::from(results);
    let files = [
        (ROUNDS_FILE, rounds_csv(results)?),
        (SUMMARY_CSV, summary_csv(&summary)?),
        (SUMMARY_JSON, serde_json::to_vec_pretty(&summary)?),
    ];
    write_all(dir, &files)
}

pub(crate) fn write_all(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}
