//! Learners driven one batch at a time: the standard learner, the holdout
//! wrappers (plain comparison and hypothesis-test gated), the
//! cross-validation wrapper, and validation-tuned ridge.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Batch;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::models::{count_mistakes, IncrementalLeastSquares, LinearModel};
use crate::seed::ExperimentRng;
use crate::stats::{check_alpha, update_ht, update_simple, PairedOutcomeCounts};

/// Anything that labels rows.
pub trait Classifier {
    fn predict(&self, data: &LabeledDataset) -> Result<Vec<usize>>;
}

impl Classifier for LinearModel {
    fn predict(&self, data: &LabeledDataset) -> Result<Vec<usize>> {
        LinearModel::predict(self, data)
    }
}

/// A base learner over a growing training set.
pub trait Trainer {
    type Model: Classifier + Clone;

    fn append(&mut self, rows: &LabeledDataset) -> Result<()>;
    fn train(&mut self) -> Result<Self::Model>;
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Ridge least squares with a fixed penalty, refitted from running moments.
#[derive(Debug, Clone)]
pub struct LeastSquaresTrainer {
    acc: IncrementalLeastSquares,
    lambda: f64,
}

impl LeastSquaresTrainer {
    pub fn new(n_features: usize, class_count: usize, lambda: f64) -> Self {
        Self {
            acc: IncrementalLeastSquares::new(n_features, class_count),
            lambda,
        }
    }
}

impl Trainer for LeastSquaresTrainer {
    type Model = LinearModel;

    fn append(&mut self, rows: &LabeledDataset) -> Result<()> {
        self.acc.push(rows)
    }

    fn train(&mut self) -> Result<LinearModel> {
        self.acc.fit(self.lambda)
    }

    fn len(&self) -> usize {
        self.acc.len()
    }
}

fn error_rate(predicted: &[usize], data: &LabeledDataset) -> f64 {
    count_mistakes(predicted, data.labels()) as f64 / data.len() as f64
}

/// Learner identifiers as written in configs and result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "SL")]
    Standard,
    #[serde(rename = "MT_SIMPLE")]
    MtSimple,
    #[serde(rename = "MT_HT")]
    MtHt,
    #[serde(rename = "MT_CV")]
    MtCv,
    #[serde(rename = "LAMBDA_S")]
    LambdaS,
}

impl LearnerKind {
    /// Presentation order of result tables.
    pub const ALL: [LearnerKind; 5] = [
        LearnerKind::Standard,
        LearnerKind::MtSimple,
        LearnerKind::MtHt,
        LearnerKind::MtCv,
        LearnerKind::LambdaS,
    ];

    pub fn id(self) -> &'static str {
        match self {
            LearnerKind::Standard => "SL",
            LearnerKind::MtSimple => "MT_SIMPLE",
            LearnerKind::MtHt => "MT_HT",
            LearnerKind::MtCv => "MT_CV",
            LearnerKind::LambdaS => "LAMBDA_S",
        }
    }

    /// Short row label for tables.
    pub fn label(self) -> &'static str {
        match self {
            LearnerKind::Standard => "SL",
            LearnerKind::MtSimple => "M_S",
            LearnerKind::MtHt => "M_HT",
            LearnerKind::MtCv => "M_CV",
            LearnerKind::LambdaS => "λ_S",
        }
    }

    /// Whether the learner compares models on the validation split.
    pub fn needs_validation(self) -> bool {
        matches!(self, LearnerKind::MtSimple | LearnerKind::MtHt | LearnerKind::LambdaS)
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown learner `{s}`")))
    }
}

/// Which trained model a learner returned: the round it was trained in and,
/// for the cross-validation wrapper, the fold left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRef {
    pub round: usize,
    pub fold: Option<usize>,
}

/// Validation errors per fold of the current round's models and the stored
/// best round's models, the latter measured before any update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldErrors {
    pub candidate: Vec<f64>,
    pub best: Vec<f64>,
}

/// Audit record of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundDecision {
    /// 1-based.
    pub round: usize,
    pub update: bool,
    pub returned: ModelRef,
    pub p_value: Option<f64>,
    pub candidate_val_error: Option<f64>,
    pub incumbent_val_error: Option<f64>,
    pub counts: Option<PairedOutcomeCounts>,
    pub fold_errors: Option<FoldErrors>,
    pub lambda: Option<f64>,
}

impl RoundDecision {
    fn fresh(round: usize) -> Self {
        Self {
            round,
            update: true,
            returned: ModelRef { round, fold: None },
            p_value: None,
            candidate_val_error: None,
            incumbent_val_error: None,
            counts: None,
            fold_errors: None,
            lambda: None,
        }
    }
}

/// A learner as seen by the experiment harness.
pub trait Learner: Send {
    fn kind(&self) -> LearnerKind;
    /// Consumes the next batch and returns the round's decision.
    fn observe(&mut self, batch: &Batch) -> Result<RoundDecision>;
    /// The model returned after the last round.
    fn returned(&self) -> Option<&LinearModel>;
}

/// Trains on everything it receives and always returns the newest model.
#[derive(Debug, Clone)]
pub struct StandardLearner<T: Trainer = LeastSquaresTrainer> {
    trainer: T,
    append_validation: bool,
    current: Option<T::Model>,
    round: usize,
}

impl<T: Trainer> StandardLearner<T> {
    /// With `append_validation` false only the training splits are used.
    pub fn new(trainer: T, append_validation: bool) -> Self {
        Self {
            trainer,
            append_validation,
            current: None,
            round: 0,
        }
    }

    pub fn current(&self) -> Option<&T::Model> {
        self.current.as_ref()
    }

    pub fn observe_batch(&mut self, batch: &Batch) -> Result<RoundDecision> {
        self.trainer.append(&batch.train)?;
        if self.append_validation {
            self.trainer.append(&batch.validation)?;
        }
        let model = self.trainer.train()?;
        self.round += 1;
        self.current = Some(model);
        Ok(RoundDecision::fresh(self.round))
    }
}

/// Comparison rule of the holdout wrapper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoldoutMode {
    /// Switch when the candidate's validation error is no larger.
    Simple,
    /// Switch when McNemar's test favours the candidate at level `alpha`.
    Ht { alpha: f64 },
}

/// Keeps an incumbent and switches to the newly trained candidate only when
/// the comparison on the current validation split says so.
#[derive(Debug, Clone)]
pub struct HoldoutWrapper<T: Trainer = LeastSquaresTrainer> {
    trainer: T,
    mode: HoldoutMode,
    append_validation: bool,
    incumbent: Option<(usize, T::Model)>,
    round: usize,
}

impl<T: Trainer> HoldoutWrapper<T> {
    pub fn new(trainer: T, mode: HoldoutMode, append_validation: bool) -> Result<Self> {
        if let HoldoutMode::Ht { alpha } = mode {
            check_alpha(alpha)?;
        }
        Ok(Self {
            trainer,
            mode,
            append_validation,
            incumbent: None,
            round: 0,
        })
    }

    pub fn incumbent(&self) -> Option<&T::Model> {
        self.incumbent.as_ref().map(|(_, m)| m)
    }

    pub fn incumbent_round(&self) -> Option<usize> {
        self.incumbent.as_ref().map(|(r, _)| *r)
    }

    /// Rows currently in the accumulated training set.
    pub fn training_size(&self) -> usize {
        self.trainer.len()
    }

    pub fn observe_batch(&mut self, batch: &Batch) -> Result<RoundDecision> {
        let val = &batch.validation;
        if val.is_empty() {
            return Err(Error::EmptyValidation);
        }
        self.trainer.append(&batch.train)?;
        let candidate = self.trainer.train()?;
        let round = self.round + 1;
        let h = candidate.predict(val)?;
        let mut decision = RoundDecision::fresh(round);
        decision.candidate_val_error = Some(error_rate(&h, val));

        if let Some((_, incumbent)) = &self.incumbent {
            let g = incumbent.predict(val)?;
            let counts = PairedOutcomeCounts::from_predictions(&h, &g, val.labels())?;
            let p_current = error_rate(&h, val);
            let p_best = error_rate(&g, val);
            decision.incumbent_val_error = Some(p_best);
            decision.counts = Some(counts);
            decision.update = match self.mode {
                HoldoutMode::Simple => update_simple(p_current, p_best),
                HoldoutMode::Ht { alpha } => {
                    let test = update_ht(&counts, alpha)?;
                    decision.p_value = Some(test.p_value);
                    test.update
                }
            };
        }

        if self.append_validation {
            self.trainer.append(val)?;
        }
        if decision.update {
            self.incumbent = Some((round, candidate));
        }
        self.round = round;
        decision.returned.round = self.incumbent_round().expect("incumbent set in round 1");
        Ok(decision)
    }
}

/// Ridge penalty chosen each round by validation error.
#[derive(Debug, Clone)]
pub struct LambdaSelect {
    acc: IncrementalLeastSquares,
    grid: Vec<f64>,
    append_validation: bool,
    current: Option<LinearModel>,
    round: usize,
}

impl LambdaSelect {
    pub fn new(n_features: usize, class_count: usize, grid: &[f64], append_validation: bool) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("lambda grid is empty".into()));
        }
        let mut grid = grid.to_vec();
        grid.sort_by(f64::total_cmp);
        Ok(Self {
            acc: IncrementalLeastSquares::new(n_features, class_count),
            grid,
            append_validation,
            current: None,
            round: 0,
        })
    }

    /// `10^lo, 10^(lo+step), …, 10^hi` in exponent steps.
    pub fn log_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| 10f64.powf(lo + i as f64 * step)).collect()
    }

    pub fn observe_batch(&mut self, batch: &Batch) -> Result<RoundDecision> {
        let val = &batch.validation;
        if val.is_empty() {
            return Err(Error::EmptyValidation);
        }
        self.acc.push(&batch.train)?;
        let models = self.acc.fit_path(&self.grid)?;
        let mut best: Option<(usize, f64)> = None;
        for (j, model) in models.iter().enumerate() {
            let err = error_rate(&model.predict(val)?, val);
            // ascending grid: `<=` hands ties to the larger penalty
            if best.is_none_or(|(_, e)| err <= e) {
                best = Some((j, err));
            }
        }
        let (j, err) = best.expect("grid is nonempty");
        if self.append_validation {
            self.acc.push(val)?;
        }
        self.round += 1;
        self.current = models.into_iter().nth(j);
        let mut decision = RoundDecision::fresh(self.round);
        decision.candidate_val_error = Some(err);
        decision.lambda = Some(self.grid[j]);
        Ok(decision)
    }
}

/// Cross-validation wrapper: pools all batches, assigns stratified fold ids
/// per batch, and switches to the current round's fold models only when
/// their mean held-out error is strictly below that of the stored best
/// round's models, re-measured on the grown folds.
#[derive(Debug, Clone)]
pub struct CvWrapper<T: Trainer = LeastSquaresTrainer> {
    /// `trainers[k]` holds every pooled row whose fold is not `k`.
    trainers: Vec<T>,
    /// `folds[k]` holds every pooled row whose fold is `k`.
    folds: Vec<LabeledDataset>,
    best: Option<(usize, Vec<T::Model>)>,
    returned_fold: usize,
    rng: ExperimentRng,
    round: usize,
}

impl<T: Trainer + Clone> CvWrapper<T> {
    pub fn new(prototype: T, folds: usize, n_features: usize, class_count: usize, rng: ExperimentRng) -> Result<Self> {
        if folds < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
        }
        if !prototype.is_empty() {
            return Err(Error::InvalidArgument("fold trainers must start empty".into()));
        }
        Ok(Self {
            trainers: vec![prototype; folds],
            folds: vec![LabeledDataset::empty(n_features, class_count); folds],
            best: None,
            returned_fold: 0,
            rng,
            round: 0,
        })
    }
}

impl<T: Trainer> CvWrapper<T> {
    pub fn folds(&self) -> usize {
        self.folds.len()
    }

    /// The model returned after the last round, with its fold.
    pub fn current(&self) -> Option<(usize, &T::Model)> {
        self.best.as_ref().map(|(_, m)| (self.returned_fold, &m[self.returned_fold]))
    }

    pub fn best_round(&self) -> Option<usize> {
        self.best.as_ref().map(|(r, _)| *r)
    }

    pub fn observe_batch(&mut self, batch: &Batch) -> Result<RoundDecision> {
        let whole = batch.whole();
        let k = self.folds.len();
        let ids = stratified_fold_ids(whole.labels(), k, &mut self.rng);
        for fold in 0..k {
            let held: Vec<usize> = (0..whole.len()).filter(|&i| ids[i] == fold).collect();
            let kept: Vec<usize> = (0..whole.len()).filter(|&i| ids[i] != fold).collect();
            self.folds[fold].append(&whole.select(&held))?;
            self.trainers[fold].append(&whole.select(&kept))?;
        }
        if let Some(fold) = self.folds.iter().position(|f| f.is_empty()) {
            return Err(Error::InvalidPlan(format!("fold {} has no validation rows", fold + 1)));
        }

        let mut candidates = Vec::with_capacity(k);
        let mut p_i = Vec::with_capacity(k);
        for fold in 0..k {
            let model = self.trainers[fold].train()?;
            p_i.push(error_rate(&model.predict(&self.folds[fold])?, &self.folds[fold]));
            candidates.push(model);
        }
        let p_b = match &self.best {
            Some((_, models)) => models
                .iter()
                .zip(&self.folds)
                .map(|(m, f)| Ok(error_rate(&m.predict(f)?, f)))
                .collect::<Result<Vec<f64>>>()?,
            None => Vec::new(),
        };

        let round = self.round + 1;
        let update = self.best.is_none() || cv_update(&p_i, &p_b);
        let mut decision = RoundDecision::fresh(round);
        decision.update = update;
        decision.candidate_val_error = Some(mean(&p_i));
        if !p_b.is_empty() {
            decision.incumbent_val_error = Some(mean(&p_b));
        }
        let current_best = if update { &p_i } else { &p_b };
        self.returned_fold = argmin_lowest(current_best);
        decision.fold_errors = Some(FoldErrors {
            candidate: p_i.clone(),
            best: p_b.clone(),
        });
        if update {
            self.best = Some((round, candidates));
        }
        self.round = round;
        decision.returned = ModelRef {
            round: self.best_round().expect("best set in round 1"),
            fold: Some(self.returned_fold),
        };
        Ok(decision)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Update rule of the cross-validation wrapper: strictly lower mean error.
pub fn cv_update(candidate: &[f64], best: &[f64]) -> bool {
    mean(candidate) < mean(best)
}

/// Index of the smallest value; the lowest index wins ties.
pub fn argmin_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = j;
        }
    }
    best
}

/// Fold ids `0..k` balanced within every class and overall: each class's
/// rows are shuffled and dealt round-robin, continuing the deal across
/// classes from a random starting fold.
pub fn stratified_fold_ids(labels: &[usize], k: usize, rng: &mut ExperimentRng) -> Vec<usize> {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut ids = vec![0; labels.len()];
    let mut next = rng.random_range(0..k);
    for c in 0..classes {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        rows.shuffle(rng);
        for i in rows {
            ids[i] = next;
            next = (next + 1) % k;
        }
    }
    ids
}

impl<T> Learner for StandardLearner<T>
where
    T: Trainer<Model = LinearModel> + Send,
{
    fn kind(&self) -> LearnerKind {
        LearnerKind::Standard
    }

    fn observe(&mut self, batch: &Batch) -> Result<RoundDecision> {
        self.observe_batch(batch)
    }

    fn returned(&self) -> Option<&LinearModel> {
        self.current()
    }
}

impl<T> Learner for HoldoutWrapper<T>
where
    T: Trainer<Model = LinearModel> + Send,
{
    fn kind(&self) -> LearnerKind {
        match self.mode {
            HoldoutMode::Simple => LearnerKind::MtSimple,
            HoldoutMode::Ht { .. } => LearnerKind::MtHt,
        }
    }

    fn observe(&mut self, batch: &Batch) -> Result<RoundDecision> {
        self.observe_batch(batch)
    }

    fn returned(&self) -> Option<&LinearModel> {
        self.incumbent()
    }
}

impl<T> Learner for CvWrapper<T>
where
    T: Trainer<Model = LinearModel> + Send,
{
    fn kind(&self) -> LearnerKind {
        LearnerKind::MtCv
    }

    fn observe(&mut self, batch: &Batch) -> Result<RoundDecision> {
        self.observe_batch(batch)
    }

    fn returned(&self) -> Option<&LinearModel> {
        self.current().map(|(_, m)| m)
    }
}

impl Learner for LambdaSelect {
    fn kind(&self) -> LearnerKind {
        LearnerKind::LambdaS
    }

    fn observe(&mut self, batch: &Batch) -> Result<RoundDecision> {
        self.observe_batch(batch)
    }

    fn returned(&self) -> Option<&LinearModel> {
        self.current.as_ref()
    }
}

/// Everything needed to build any learner for one run.
#[derive(Debug, Clone)]
pub struct LearnerSettings {
    pub n_features: usize,
    pub class_count: usize,
    pub append_validation: bool,
    /// Ridge penalty of the base learner.
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub folds: usize,
    pub lambda_grid: Vec<f64>,
}

pub fn build_learner(kind: LearnerKind, settings: &LearnerSettings, fold_rng: ExperimentRng) -> Result<Box<dyn Learner>> {
    let base = LeastSquaresTrainer::new(settings.n_features, settings.class_count, settings.lambda);
    Ok(match kind {
        LearnerKind::Standard => Box::new(StandardLearner::new(base, settings.append_validation)),
        LearnerKind::MtSimple => Box::new(HoldoutWrapper::new(base, HoldoutMode::Simple, settings.append_validation)?),
        LearnerKind::MtHt => {
            let alpha = settings
                .alpha
                .ok_or_else(|| Error::config("alpha", "required by MT_HT"))?;
            Box::new(HoldoutWrapper::new(base, HoldoutMode::Ht { alpha }, settings.append_validation)?)
        }
        LearnerKind::MtCv => Box::new(CvWrapper::new(
            base,
            settings.folds,
            settings.n_features,
            settings.class_count,
            fold_rng,
        )?),
        LearnerKind::LambdaS => Box::new(LambdaSelect::new(
            settings.n_features,
            settings.class_count,
            &settings.lambda_grid,
            settings.append_validation,
        )?),
    })
}
