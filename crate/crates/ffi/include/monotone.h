#ifndef MONOTONE_H
#define MONOTONE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum MtStatus {
  MT_STATUS_OK = 0,
  MT_STATUS_NULL_POINTER = 1,
  MT_STATUS_INVALID_ARGUMENT = 2,
  MT_STATUS_INVALID_DATA = 3,
  MT_STATUS_DIMENSION_MISMATCH = 4,
  MT_STATUS_ALPHA_OUT_OF_RANGE = 5,
  MT_STATUS_EMPTY_DATA = 6,
  MT_STATUS_NUMERICAL = 7,
  MT_STATUS_CONFIG = 8,
  MT_STATUS_IO = 9,
  MT_STATUS_NOT_READY = 10,
  MT_STATUS_PANIC = 11,
} MtStatus;

/**
 * Learners available through [`mt_learner_new`].
 */
typedef enum MtLearnerKind {
  MT_LEARNER_KIND_STANDARD = 0,
  MT_LEARNER_KIND_SIMPLE = 1,
  MT_LEARNER_KIND_HYPOTHESIS_TEST = 2,
  MT_LEARNER_KIND_CROSS_VALIDATION = 3,
  MT_LEARNER_KIND_LAMBDA_SELECT = 4,
} MtLearnerKind;

/**
 * Feature matrix with labels.
 */
typedef struct MtDataset MtDataset;

/**
 * A learner fed one batch per round.
 */
typedef struct MtLearner MtLearner;

/**
 * A fitted linear classifier.
 */
typedef struct MtModel MtModel;

/**
 * Settings for [`mt_learner_new`]. Start from [`mt_learner_options_default`].
 */
typedef struct MtLearnerOptions {
  /**
   * Ridge penalty of the base learner.
   */
  double lambda;
  /**
   * Significance level of the hypothesis-test wrapper.
   */
  double alpha;
  /**
   * Folds of the cross-validation wrapper.
   */
  size_t folds;
  /**
   * Whether validation rows join the training set after each round.
   */
  bool append_validation;
  /**
   * Candidate penalties of the lambda-select learner; null for the default
   * grid `10^-5 … 10^5` in half decades.
   */
  const double *lambda_grid;
  size_t lambda_grid_len;
  /**
   * Seed of the fold assignment.
   */
  uint64_t seed;
} MtLearnerOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *mt_last_error(void);

/**
 * Static description of a status code.
 */
const char *mt_status_str(enum MtStatus status);

/**
 * Exact one-tailed McNemar p-value `P(X >= b)`, `X ~ Binomial(b + c, 1/2)`.
 *
 * # Safety
 * `p_value` must be writable.
 */
enum MtStatus mt_mcnemar_p_value(size_t b, size_t c, double *p_value);

/**
 * Hypothesis-test update rule: switch when the p-value is at most `alpha`.
 *
 * # Safety
 * `update` must be writable; `p_value` must be null or writable.
 */
enum MtStatus mt_update_ht(size_t b, size_t c, double alpha, bool *update, double *p_value);

/**
 * Per-round level giving probability `beta` of a fully monotone run.
 *
 * # Safety
 * `alpha` must be writable.
 */
enum MtStatus mt_alpha_for_run_budget(double beta, size_t rounds, double *alpha);

/**
 * Copies `rows × cols` row-major features and `rows` labels into a new
 * dataset. Free with [`mt_dataset_free`].
 *
 * # Safety
 * `features` must point to `rows * cols` doubles, `labels` to `rows`
 * values, and `dataset` must be writable.
 */
enum MtStatus mt_dataset_new(const double *features,
                             size_t rows,
                             size_t cols,
                             const size_t *labels,
                             size_t class_count,
                             struct MtDataset **dataset);

/**
 *
 * # Safety
 * `dataset` must be null or a live dataset handle.
 */
size_t mt_dataset_rows(const struct MtDataset *dataset);

/**
 *
 * # Safety
 * `dataset` must be null or a live dataset handle.
 */
size_t mt_dataset_cols(const struct MtDataset *dataset);

/**
 * Releases a dataset. Null is ignored.
 *
 * # Safety
 * `dataset` must be null or a live handle not used afterwards.
 */
void mt_dataset_free(struct MtDataset *dataset);

/**
 * Least-squares classifier with ridge penalty `lambda` (0 gives the
 * minimum-norm solution). Free with [`mt_model_free`].
 *
 * # Safety
 * `dataset` must be a live handle and `model` writable.
 */
enum MtStatus mt_model_fit(const struct MtDataset *dataset, double lambda, struct MtModel **model);

/**
 * Writes one label per row of the `rows × cols` row-major features.
 *
 * # Safety
 * `model` must be a live handle, `features` must point to `rows * cols`
 * doubles and `labels` to room for `rows` values.
 */
enum MtStatus mt_model_predict(const struct MtModel *model,
                               const double *features,
                               size_t rows,
                               size_t cols,
                               size_t *labels);

/**
 * Fraction of `dataset` rows the model misclassifies.
 *
 * # Safety
 * `model` and `dataset` must be live handles and `error` writable.
 */
enum MtStatus mt_model_error(const struct MtModel *model,
                             const struct MtDataset *dataset,
                             double *error);

/**
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t mt_model_dim(const struct MtModel *model);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a live handle not used afterwards.
 */
void mt_model_free(struct MtModel *model);

struct MtLearnerOptions mt_learner_options_default(void);

/**
 * Creates a learner for `n_features`-dimensional rows over `class_count`
 * classes. `options` may be null for the defaults. Free with
 * [`mt_learner_free`].
 *
 * # Safety
 * `options` must be null or valid, with `lambda_grid` pointing to
 * `lambda_grid_len` doubles when non-null; `learner` must be writable.
 */
enum MtStatus mt_learner_new(enum MtLearnerKind kind,
                             size_t n_features,
                             size_t class_count,
                             const struct MtLearnerOptions *options,
                             struct MtLearner **learner);

/**
 * Feeds one round: `train` rows, then `validation` rows (may be null for
 * the standard learner). `updated` (optional) reports whether the returned
 * model changed.
 *
 * # Safety
 * `learner` and `train` must be live handles; `validation` and
 * `updated` may be null.
 */
enum MtStatus mt_learner_observe(struct MtLearner *learner,
                                 const struct MtDataset *train,
                                 const struct MtDataset *validation,
                                 bool *updated);

/**
 * Copies the learner's current model into a new handle.
 *
 * # Safety
 * `learner` must be a live handle and `model` writable.
 */
enum MtStatus mt_learner_model(const struct MtLearner *learner, struct MtModel **model);

/**
 * Releases a learner. Null is ignored.
 *
 * # Safety
 * `learner` must be null or a live handle not used afterwards.
 */
void mt_learner_free(struct MtLearner *learner);

/**
 * Runs the experiment described by `config` (TOML text or a preset name)
 * and writes `rounds.csv`, `summary.csv` and `summary.json` into `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
enum MtStatus mt_run_experiment(const char *config, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MONOTONE_H */
