//! C interface: opaque handles for datasets, fitted models and incremental
//! learners, the paired test statistics, and whole experiments driven by a
//! TOML config. Every fallible function returns an [`MtStatus`]; the text of
//! the most recent failure on the calling thread is available from
//! [`mt_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use monotone_core::data::Batch;
use monotone_core::error::Error;
use monotone_core::harness::{run_experiment, write_results, ExperimentConfig};
use monotone_core::models::{empirical_error, fit_least_squares, LinearModel};
use monotone_core::seed::{rng_for, Purpose};
use monotone_core::stats::{alpha_for_run_budget, mcnemar_exact_one_tailed, update_ht, PairedOutcomeCounts};
use monotone_core::wrappers::{build_learner, LambdaSelect, Learner, LearnerKind, LearnerSettings};
use monotone_core::LabeledDataset;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    DimensionMismatch = 4,
    AlphaOutOfRange = 5,
    EmptyData = 6,
    Numerical = 7,
    Config = 8,
    Io = 9,
    NotReady = 10,
    Panic = 11,
}

/// Learners available through [`mt_learner_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtLearnerKind {
    Standard = 0,
    Simple = 1,
    HypothesisTest = 2,
    CrossValidation = 3,
    LambdaSelect = 4,
}

impl From<MtLearnerKind> for LearnerKind {
    fn from(k: MtLearnerKind) -> Self {
        match k {
            MtLearnerKind::Standard => LearnerKind::Standard,
            MtLearnerKind::Simple => LearnerKind::MtSimple,
            MtLearnerKind::HypothesisTest => LearnerKind::MtHt,
            MtLearnerKind::CrossValidation => LearnerKind::MtCv,
            MtLearnerKind::LambdaSelect => LearnerKind::LambdaS,
        }
    }
}

/// Settings for [`mt_learner_new`]. Start from [`mt_learner_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MtLearnerOptions {
    /// Ridge penalty of the base learner.
    pub lambda: f64,
    /// Significance level of the hypothesis-test wrapper.
    pub alpha: f64,
    /// Folds of the cross-validation wrapper.
    pub folds: usize,
    /// Whether validation rows join the training set after each round.
    pub append_validation: bool,
    /// Candidate penalties of the lambda-select learner; null for the default
    /// grid `10^-5 … 10^5` in half decades.
    pub lambda_grid: *const f64,
    pub lambda_grid_len: usize,
    /// Seed of the fold assignment.
    pub seed: u64,
}

/// Feature matrix with labels.
pub struct MtDataset(LabeledDataset);

/// A fitted linear classifier.
pub struct MtModel(LinearModel);

/// A learner fed one batch per round.
pub struct MtLearner(Box<dyn Learner>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> MtStatus {
    match e {
        Error::EmptyTrainingSet | Error::EmptyEvaluationSet | Error::EmptyValidation => MtStatus::EmptyData,
        Error::InvalidData(_) | Error::Idx { .. } | Error::InsufficientRows { .. } => MtStatus::InvalidData,
        Error::DimensionMismatch { .. } => MtStatus::DimensionMismatch,
        Error::AlphaOutOfRange(_) => MtStatus::AlphaOutOfRange,
        Error::InvalidArgument(_) | Error::InvalidPlan(_) => MtStatus::InvalidArgument,
        Error::Config { .. } => MtStatus::Config,
        Error::Numerical(_) => MtStatus::Numerical,
        Error::MissingResults(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => MtStatus::Io,
    }
}

struct Failure(MtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: MtStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MtStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MtStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this
    // library that has not been freed.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(MtStatus::NullPointer, format!("{name} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as in `non_null`, with exclusive access guaranteed by the caller.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(MtStatus::NullPointer, format!("{name} is null")))
}

fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(MtStatus::NullPointer, format!("{name} is null"));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn string<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(MtStatus::NullPointer, format!("{name} is null"));
    }
    // SAFETY: the caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .or_else(|_| fail(MtStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn out<T>(p: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return fail(MtStatus::NullPointer, format!("{name} is null"));
    }
    // SAFETY: checked non-null; the caller guarantees it is writable.
    unsafe { p.write(value) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn mt_status_str(status: MtStatus) -> *const c_char {
    let s: &'static CStr = match status {
        MtStatus::Ok => c"ok",
        MtStatus::NullPointer => c"null pointer",
        MtStatus::InvalidArgument => c"invalid argument",
        MtStatus::InvalidData => c"invalid data",
        MtStatus::DimensionMismatch => c"dimension mismatch",
        MtStatus::AlphaOutOfRange => c"alpha out of range",
        MtStatus::EmptyData => c"empty data",
        MtStatus::Numerical => c"numerical failure",
        MtStatus::Config => c"config error",
        MtStatus::Io => c"i/o error",
        MtStatus::NotReady => c"not ready",
        MtStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Exact one-tailed McNemar p-value `P(X >= b)`, `X ~ Binomial(b + c, 1/2)`.
///
/// # Safety
/// `p_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_mcnemar_p_value(b: usize, c: usize, p_value: *mut f64) -> MtStatus {
    guard(|| {
        let counts = PairedOutcomeCounts {
            n10: b,
            n01: c,
            ..Default::default()
        };
        out(p_value, mcnemar_exact_one_tailed(&counts), "p_value")
    })
}

/// Hypothesis-test update rule: switch when the p-value is at most `alpha`.
///
/// # Safety
/// `update` must be writable; `p_value` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn mt_update_ht(b: usize, c: usize, alpha: f64, update: *mut bool, p_value: *mut f64) -> MtStatus {
    guard(|| {
        let counts = PairedOutcomeCounts {
            n10: b,
            n01: c,
            ..Default::default()
        };
        let d = update_ht(&counts, alpha)?;
        out(update, d.update, "update")?;
        if !p_value.is_null() {
            out(p_value, d.p_value, "p_value")?;
        }
        Ok(())
    })
}

/// Per-round level giving probability `beta` of a fully monotone run.
///
/// # Safety
/// `alpha` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_alpha_for_run_budget(beta: f64, rounds: usize, alpha: *mut f64) -> MtStatus {
    guard(|| out(alpha, alpha_for_run_budget(beta, rounds)?, "alpha"))
}

/// Copies `rows × cols` row-major features and `rows` labels into a new
/// dataset. Free with [`mt_dataset_free`].
///
/// # Safety
/// `features` must point to `rows * cols` doubles, `labels` to `rows`
/// values, and `dataset` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_dataset_new(
    features: *const f64,
    rows: usize,
    cols: usize,
    labels: *const usize,
    class_count: usize,
    dataset: *mut *mut MtDataset,
) -> MtStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(MtStatus::InvalidArgument, "rows * cols overflows".into()))?;
        let x = slice(features, len, "features")?.to_vec();
        let y = slice(labels, rows, "labels")?.to_vec();
        let data = LabeledDataset::new(x, cols, y, class_count)?;
        out(dataset, Box::into_raw(Box::new(MtDataset(data))), "dataset")
    })
}

///
/// # Safety
/// `dataset` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn mt_dataset_rows(dataset: *const MtDataset) -> usize {
    non_null(dataset, "dataset").map_or(0, |d| d.0.len())
}

///
/// # Safety
/// `dataset` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn mt_dataset_cols(dataset: *const MtDataset) -> usize {
    non_null(dataset, "dataset").map_or(0, |d| d.0.n_features())
}

/// Releases a dataset. Null is ignored.
///
/// # Safety
/// `dataset` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_dataset_free(dataset: *mut MtDataset) {
    if !dataset.is_null() {
        // SAFETY: the pointer came from `mt_dataset_new` and is freed once.
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Least-squares classifier with ridge penalty `lambda` (0 gives the
/// minimum-norm solution). Free with [`mt_model_free`].
///
/// # Safety
/// `dataset` must be a live handle and `model` writable.
#[no_mangle]
pub unsafe extern "C" fn mt_model_fit(dataset: *const MtDataset, lambda: f64, model: *mut *mut MtModel) -> MtStatus {
    guard(|| {
        let data = non_null(dataset, "dataset")?;
        let fitted = fit_least_squares(&data.0, lambda)?;
        out(model, Box::into_raw(Box::new(MtModel(fitted))), "model")
    })
}

/// Writes one label per row of the `rows × cols` row-major features.
///
/// # Safety
/// `model` must be a live handle, `features` must point to `rows * cols`
/// doubles and `labels` to room for `rows` values.
#[no_mangle]
pub unsafe extern "C" fn mt_model_predict(
    model: *const MtModel,
    features: *const f64,
    rows: usize,
    cols: usize,
    labels: *mut usize,
) -> MtStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        if cols != m.0.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.0.dim(),
                got: cols,
            }
            .into());
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(MtStatus::InvalidArgument, "rows * cols overflows".into()))?;
        let predicted = m.0.predict_features(slice(features, len, "features")?)?;
        if rows > 0 && labels.is_null() {
            return fail(MtStatus::NullPointer, "labels is null");
        }
        for (i, p) in predicted.into_iter().enumerate() {
            // SAFETY: the caller provides room for `rows` labels.
            unsafe { labels.add(i).write(p) };
        }
        Ok(())
    })
}

/// Fraction of `dataset` rows the model misclassifies.
///
/// # Safety
/// `model` and `dataset` must be live handles and `error` writable.
#[no_mangle]
pub unsafe extern "C" fn mt_model_error(model: *const MtModel, dataset: *const MtDataset, error: *mut f64) -> MtStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let d = non_null(dataset, "dataset")?;
        out(error, empirical_error(&m.0, &d.0)?, "error")
    })
}

///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn mt_model_dim(model: *const MtModel) -> usize {
    non_null(model, "model").map_or(0, |m| m.0.dim())
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_model_free(model: *mut MtModel) {
    if !model.is_null() {
        // SAFETY: the pointer came from this library and is freed once.
        drop(unsafe { Box::from_raw(model) });
    }
}

#[no_mangle]
pub extern "C" fn mt_learner_options_default() -> MtLearnerOptions {
    MtLearnerOptions {
        lambda: 0.0,
        alpha: 0.05,
        folds: 5,
        append_validation: true,
        lambda_grid: ptr::null(),
        lambda_grid_len: 0,
        seed: 0,
    }
}

/// Creates a learner for `n_features`-dimensional rows over `class_count`
/// classes. `options` may be null for the defaults. Free with
/// [`mt_learner_free`].
///
/// # Safety
/// `options` must be null or valid, with `lambda_grid` pointing to
/// `lambda_grid_len` doubles when non-null; `learner` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_learner_new(
    kind: MtLearnerKind,
    n_features: usize,
    class_count: usize,
    options: *const MtLearnerOptions,
    learner: *mut *mut MtLearner,
) -> MtStatus {
    guard(|| {
        if n_features == 0 || class_count < 2 {
            return fail(MtStatus::InvalidArgument, "need n_features >= 1 and class_count >= 2");
        }
        let o = if options.is_null() {
            mt_learner_options_default()
        } else {
            *non_null(options, "options")?
        };
        let grid = if o.lambda_grid.is_null() {
            LambdaSelect::log_grid(-5.0, 5.0, 0.5)
        } else {
            slice(o.lambda_grid, o.lambda_grid_len, "lambda_grid")?.to_vec()
        };
        let settings = LearnerSettings {
            n_features,
            class_count,
            append_validation: o.append_validation,
            lambda: o.lambda,
            alpha: Some(o.alpha),
            folds: o.folds,
            lambda_grid: grid,
        };
        let built = build_learner(kind.into(), &settings, rng_for(o.seed, Purpose::Folds))?;
        out(learner, Box::into_raw(Box::new(MtLearner(built))), "learner")
    })
}

/// Feeds one round: `train` rows, then `validation` rows (may be null for
/// the standard learner). `updated` (optional) reports whether the returned
/// model changed.
///
/// # Safety
/// `learner` and `train` must be live handles; `validation` and
/// `updated` may be null.
#[no_mangle]
pub unsafe extern "C" fn mt_learner_observe(
    learner: *mut MtLearner,
    train: *const MtDataset,
    validation: *const MtDataset,
    updated: *mut bool,
) -> MtStatus {
    guard(|| {
        let l = non_null_mut(learner, "learner")?;
        let train = non_null(train, "train")?.0.clone();
        let validation = if validation.is_null() {
            LabeledDataset::empty(train.n_features(), train.class_count())
        } else {
            non_null(validation, "validation")?.0.clone()
        };
        let decision = l.0.observe(&Batch { train, validation })?;
        if !updated.is_null() {
            out(updated, decision.update, "updated")?;
        }
        Ok(())
    })
}

/// Copies the learner's current model into a new handle.
///
/// # Safety
/// `learner` must be a live handle and `model` writable.
#[no_mangle]
pub unsafe extern "C" fn mt_learner_model(learner: *const MtLearner, model: *mut *mut MtModel) -> MtStatus {
    guard(|| {
        let l = non_null(learner, "learner")?;
        let current = l
            .0
            .returned()
            .ok_or_else(|| Failure(MtStatus::NotReady, "no round observed yet".into()))?;
        out(model, Box::into_raw(Box::new(MtModel(current.clone()))), "model")
    })
}

/// Releases a learner. Null is ignored.
///
/// # Safety
/// `learner` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_learner_free(learner: *mut MtLearner) {
    if !learner.is_null() {
        // SAFETY: the pointer came from `mt_learner_new` and is freed once.
        drop(unsafe { Box::from_raw(learner) });
    }
}

/// Runs the experiment described by `config` (TOML text or a preset name)
/// and writes `rounds.csv`, `summary.csv` and `summary.json` into `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn mt_run_experiment(config: *const c_char, out_dir: *const c_char) -> MtStatus {
    guard(|| {
        let text = string(config, "config")?;
        let dir = string(out_dir, "out_dir")?;
        let parsed = if ExperimentConfig::preset(text).is_some() {
            ExperimentConfig::load(text, &[])?
        } else {
            ExperimentConfig::from_toml_str(text, &[])?
        };
        let results = run_experiment(&parsed)?;
        write_results(Path::new(dir), &results)?;
        Ok(())
    })
}
