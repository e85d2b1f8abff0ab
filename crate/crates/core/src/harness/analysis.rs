//! Parameter sweeps and run-level checks of the hypothesis-test wrapper.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{run_experiment_with, ExperimentResults, PreparedSource};
use super::metrics::{mean_std, rises, CurveStats};
use crate::error::{Error, Result};
use crate::stats::monotone_run_probability_bound;
use crate::wrappers::LearnerKind;

pub const DEFAULT_SWEEP_ALPHAS: [f64; 6] = [0.01, 0.025, 0.05, 0.1, 0.25, 0.5];
pub const DEFAULT_SWEEP_NVS: [usize; 7] = [2, 4, 8, 16, 32, 64, 128];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub nv: usize,
    pub stats: Vec<CurveStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    pub name: String,
    pub alphas: Vec<f64>,
    pub nvs: Vec<usize>,
    pub cells: Vec<SweepCell>,
}

/// Runs the template over the grid `alphas × nvs` with validation rows kept
/// out of the training set. Learners that ignore `alpha` run once per `nv`.
pub fn sweep(template: &ExperimentConfig, alphas: &[f64], nvs: &[usize]) -> Result<SweepResults> {
    if alphas.is_empty() || nvs.is_empty() {
        return Err(Error::InvalidArgument("sweep grids must be nonempty".into()));
    }
    let mut base = template.clone();
    base.plan.append_validation = false;
    base.monotone_confidence = None;
    base.alpha = Some(alphas[0]);
    base.validate()?;
    let source = PreparedSource::prepare(&base)?;

    let mut cells = Vec::with_capacity(alphas.len() * nvs.len());
    for &nv in nvs {
        let mut cfg = base.clone();
        cfg.plan.val_per_round = nv;
        let others: Vec<LearnerKind> = cfg.learners.iter().copied().filter(|&k| k != LearnerKind::MtHt).collect();
        let shared = if others.is_empty() {
            Vec::new()
        } else {
            let mut c = cfg.clone();
            c.learners = others;
            run_experiment_with(&c, &source)?.stats
        };
        for &alpha in alphas {
            let mut stats = shared.clone();
            if cfg.has(LearnerKind::MtHt) {
                let mut c = cfg.clone();
                c.learners = vec![LearnerKind::MtHt];
                c.alpha = Some(alpha);
                stats.extend(run_experiment_with(&c, &source)?.stats);
            }
            stats.sort_by_key(|s| s.learner);
            log::info!("sweep cell alpha={alpha} nv={nv} done");
            cells.push(SweepCell { alpha, nv, stats });
        }
    }
    Ok(SweepResults {
        name: template.name.clone(),
        alphas: alphas.to_vec(),
        nvs: nvs.to_vec(),
        cells,
    })
}

/// Observed monotonicity of MT_HT against the `(1 − α)^n` guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub alpha: f64,
    pub rounds: usize,
    pub runs: usize,
    pub monotone_runs: usize,
    pub observed_monotone_fraction: f64,
    pub bound: f64,
    pub binomial_sigma: f64,
    /// The run-level check cannot fail because `bound − 3σ ≤ 0`.
    pub vacuous: bool,
    pub run_check_passed: bool,
    pub decisions: usize,
    pub nonmonotone_decisions: usize,
    pub decision_rate: f64,
    pub decision_check_passed: bool,
    pub passed: bool,
}

pub fn verify_theorem1(results: &ExperimentResults) -> Result<MonotonicityReport> {
    let alpha = results
        .config
        .effective_alpha()?
        .filter(|_| results.config.has(LearnerKind::MtHt))
        .ok_or_else(|| Error::config("learners", "verification needs MT_HT"))?;
    let runs = results.learner_runs(LearnerKind::MtHt);
    let n = results.config.plan.rounds;
    let r = runs.len();
    let monotone_runs = runs.iter().filter(|run| rises(&run.errors) == 0).count();
    let nonmonotone_decisions: usize = runs.iter().map(|run| rises(&run.errors)).sum();
    let decisions = r * n.saturating_sub(1);
    let bound = monotone_run_probability_bound(alpha, n);
    let binomial_sigma = (bound * (1.0 - bound) / r as f64).sqrt();
    let observed = monotone_runs as f64 / r as f64;
    let decision_rate = if decisions == 0 {
        0.0
    } else {
        nonmonotone_decisions as f64 / decisions as f64
    };
    let run_check_passed = observed >= bound - 3.0 * binomial_sigma;
    let decision_check_passed = decision_rate <= alpha;
    Ok(MonotonicityReport {
        alpha,
        rounds: n,
        runs: r,
        monotone_runs,
        observed_monotone_fraction: observed,
        bound,
        binomial_sigma,
        vacuous: bound - 3.0 * binomial_sigma <= 0.0,
        run_check_passed,
        decisions,
        nonmonotone_decisions,
        decision_rate,
        decision_check_passed,
        passed: run_check_passed && decision_check_passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyEntry {
    pub learner: LearnerKind,
    pub last_update_rounds: Vec<usize>,
    /// Runs whose incumbent never changed after round `n / 2`.
    pub frozen_runs: usize,
    pub final_error_mean: f64,
    pub final_error_std: f64,
    /// Final mean error minus the standard learner's, when SL was run.
    pub gap_to_standard: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rounds: usize,
    pub entries: Vec<ConsistencyEntry>,
}

impl ConsistencyReport {
    pub fn entry(&self, kind: LearnerKind) -> Option<&ConsistencyEntry> {
        self.entries.iter().find(|e| e.learner == kind)
    }
}

/// Where each learner stopped switching and how far its final error is
/// from the standard learner's.
pub fn consistency_smoke(results: &ExperimentResults) -> ConsistencyReport {
    let n = results.config.plan.rounds;
    let final_of = |kind| {
        let finals: Vec<f64> = results
            .learner_runs(kind)
            .iter()
            .map(|r| *r.errors.last().expect("at least one round"))
            .collect();
        mean_std(&finals)
    };
    let standard = results.config.has(LearnerKind::Standard).then(|| final_of(LearnerKind::Standard).0);
    let entries = results
        .config
        .learners
        .iter()
        .map(|&kind| {
            let last_update_rounds: Vec<usize> =
                results.learner_runs(kind).iter().map(|r| r.last_update_round).collect();
            let (final_error_mean, final_error_std) = final_of(kind);
            ConsistencyEntry {
                learner: kind,
                frozen_runs: last_update_rounds.iter().filter(|&&r| 2 * r < n).count(),
                last_update_rounds,
                final_error_mean,
                final_error_std,
                gap_to_standard: standard.map(|s| final_error_mean - s),
            }
        })
        .collect();
    ConsistencyReport { rounds: n, entries }
}
