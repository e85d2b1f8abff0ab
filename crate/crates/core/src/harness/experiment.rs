//! Multi-run execution of an experiment configuration.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{aulc, nonmonotone_fraction, CurveStats};
use crate::data::batches::draw_batches_with;
use crate::data::{load_mnist, Batch, BatchSource, FourierProjection, Sampling, SourceSpec, Synthetic};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::models::empirical_error;
use crate::seed::{purpose_seed, rng_for, run_seed, ExperimentRng, Purpose};
use crate::wrappers::{build_learner, Learner, LearnerKind, RoundDecision};
use rand::SeedableRng;

/// A data source ready to hand out batches and test sets.
#[derive(Debug, Clone)]
pub enum PreparedSource {
    Synthetic(Synthetic),
    /// Batches come from `train` without replacement; every run shares `test`.
    Pool { train: LabeledDataset, test: LabeledDataset },
}

impl PreparedSource {
    /// Builds the source. MNIST files are read once and mapped through a
    /// random Fourier projection drawn from the master seed.
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        match &config.source {
            SourceSpec::Mnist(params) => {
                let paths = params.paths()?;
                let train = load_mnist(&paths.train_images, &paths.train_labels)?;
                let test = load_mnist(&paths.test_images, &paths.test_labels)?;
                let mut rng = ExperimentRng::seed_from_u64(purpose_seed(config.seed, Purpose::Projection));
                let projection = FourierProjection::draw(train.n_features(), params.features, params.bandwidth, &mut rng)?;
                Ok(PreparedSource::Pool {
                    train: projection.apply(&train)?,
                    test: projection.apply(&test)?,
                })
            }
            other => Ok(PreparedSource::Synthetic(other.synthetic().expect("synthetic source"))),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            PreparedSource::Synthetic(s) => s.dim(),
            PreparedSource::Pool { train, .. } => train.n_features(),
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            PreparedSource::Synthetic(s) => s.class_count(),
            PreparedSource::Pool { train, .. } => train.class_count(),
        }
    }
}

/// Everything one run consumes: its batches and its test set.
#[derive(Debug, Clone)]
pub struct RunContext<'a> {
    pub run: usize,
    pub seed: u64,
    pub batches: Vec<Batch>,
    pub test: Cow<'a, LabeledDataset>,
}

impl<'a> RunContext<'a> {
    /// Batches depend only on the master seed and run index, never on the
    /// learner set, so all learners of a run see the same data.
    pub fn new(config: &ExperimentConfig, source: &'a PreparedSource, run: usize) -> Result<Self> {
        let seed = run_seed(config.seed, run);
        let mut batch_rng = rng_for(seed, Purpose::Batches);
        let (batches, test) = match source {
            PreparedSource::Synthetic(s) => {
                let batches = draw_batches_with(BatchSource::Synthetic(s), &config.plan, &mut batch_rng)?;
                let mut test_rng = rng_for(seed, Purpose::TestSet);
                let test = s.sample(config.test_size, Sampling::Random, &mut test_rng);
                (batches, Cow::Owned(test))
            }
            PreparedSource::Pool { train, test } => (
                draw_batches_with(BatchSource::Pool(train), &config.plan, &mut batch_rng)?,
                Cow::Borrowed(test),
            ),
        };
        Ok(Self {
            run,
            seed,
            batches,
            test,
        })
    }
}

/// One learner's trace over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerTrace {
    /// True error of the returned model after each round.
    pub errors: Vec<f64>,
    pub decisions: Vec<RoundDecision>,
}

/// Feeds every batch to every learner and measures the returned models on
/// `test`. Learners only ever see batches.
pub fn drive_learners(
    learners: &mut [Box<dyn Learner>],
    batches: &[Batch],
    test: &LabeledDataset,
) -> Result<Vec<LearnerTrace>> {
    learners
        .iter_mut()
        .map(|learner| {
            let mut trace = LearnerTrace {
                errors: Vec::with_capacity(batches.len()),
                decisions: Vec::with_capacity(batches.len()),
            };
            for batch in batches {
                trace.decisions.push(learner.observe(batch)?);
                let model = learner.returned().expect("a model exists after a round");
                trace.errors.push(empirical_error(model, test)?);
            }
            Ok(trace)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub learner: LearnerKind,
    pub errors: Vec<f64>,
    pub decisions: Vec<RoundDecision>,
    pub aulc: f64,
    pub nonmonotone_fraction: f64,
    /// Last round whose decision switched models (0 if none did).
    pub last_update_round: usize,
}

impl RunResult {
    pub fn from_trace(run: usize, learner: LearnerKind, trace: LearnerTrace) -> Result<Self> {
        let aulc = aulc(&trace.errors)?;
        let nonmonotone_fraction = if trace.errors.len() >= 2 {
            nonmonotone_fraction(&trace.errors)?
        } else {
            0.0
        };
        let last_update_round = trace
            .decisions
            .iter()
            .filter(|d| d.update)
            .map(|d| d.round)
            .max()
            .unwrap_or(0);
        Ok(Self {
            run,
            learner,
            errors: trace.errors,
            decisions: trace.decisions,
            aulc,
            nonmonotone_fraction,
            last_update_round,
        })
    }
}

/// All runs and their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub training_sizes: Vec<usize>,
    /// `runs[r]` holds run `r`'s results in `config.learners` order.
    pub runs: Vec<Vec<RunResult>>,
    /// In `config.learners` order.
    pub stats: Vec<CurveStats>,
}

impl ExperimentResults {
    pub fn learner_runs(&self, kind: LearnerKind) -> Vec<&RunResult> {
        self.runs.iter().flatten().filter(|r| r.learner == kind).collect()
    }

    pub fn stats_for(&self, kind: LearnerKind) -> Option<&CurveStats> {
        self.stats.iter().find(|s| s.learner == kind)
    }
}

/// Executes a single run of every configured learner.
pub fn run_once(config: &ExperimentConfig, source: &PreparedSource, run: usize) -> Result<Vec<RunResult>> {
    let ctx = RunContext::new(config, source, run)?;
    let settings = config.learner_settings(source.n_features(), source.class_count())?;
    let mut learners = config
        .learners
        .iter()
        .map(|&k| build_learner(k, &settings, rng_for(ctx.seed, Purpose::Folds)))
        .collect::<Result<Vec<_>>>()?;
    let traces = drive_learners(&mut learners, &ctx.batches, &ctx.test)?;
    config
        .learners
        .iter()
        .zip(traces)
        .map(|(&k, t)| RunResult::from_trace(run, k, t))
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    let source = PreparedSource::prepare(config)?;
    run_experiment_with(config, &source)
}

/// Runs are executed in parallel and collected in run order.
pub fn run_experiment_with(config: &ExperimentConfig, source: &PreparedSource) -> Result<ExperimentResults> {
    config.validate()?;
    let runs = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let out = run_once(config, source, run);
            log::debug!("{}: run {} finished", config.name, run);
            out
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = config
        .learners
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let curves: Vec<Vec<f64>> = runs.iter().map(|r| r[j].errors.clone()).collect();
            CurveStats::from_curves(k, &curves)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResults {
        training_sizes: config.training_sizes(),
        config: config.clone(),
        runs,
        stats,
    })
}

impl From<&ExperimentResults> for Summary {
    fn from(r: &ExperimentResults) -> Self {
        Summary {
            name: r.config.name.clone(),
            source: r.config.source.name().into(),
            runs: r.config.runs,
            rounds: r.config.plan.rounds,
            training_sizes: r.training_sizes.clone(),
            learners: r.stats.clone(),
            config: r.config.clone(),
        }
    }
}

/// Machine-readable aggregate of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub source: String,
    pub runs: usize,
    pub rounds: usize,
    pub training_sizes: Vec<usize>,
    pub learners: Vec<CurveStats>,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MissingResults(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}
