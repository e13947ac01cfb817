#ifndef GRNN_SDR_H
#define GRNN_SDR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GrnnActivation {
  GRNN_ACTIVATION_TANH = 0,
  GRNN_ACTIVATION_LOGISTIC = 1,
} GrnnActivation;

/**
 * Result code of every fallible call.
 */
typedef enum GrnnStatus {
  GRNN_STATUS_OK = 0,
  GRNN_STATUS_NULL_POINTER = 1,
  GRNN_STATUS_INVALID_ARGUMENT = 2,
  GRNN_STATUS_DATA_ERROR = 3,
  GRNN_STATUS_NUMERICAL_ERROR = 4,
  GRNN_STATUS_BUFFER_TOO_SMALL = 5,
  GRNN_STATUS_PANIC = 6,
} GrnnStatus;

/**
 * Predictors, responses and, for simulated data, the true basis.
 */
typedef struct GrnnDataset GrnnDataset;

/**
 * Result of [`grnn_fit`].
 */
typedef struct GrnnOutcome GrnnOutcome;

/**
 * Training options; obtain defaults from [`grnn_train_config_default`].
 */
typedef struct GrnnTrainConfig {
  size_t m;
  size_t restarts;
  double lambda;
  double learning_rate;
  size_t epochs;
  enum GrnnActivation activation;
  bool standardize;
  uint64_t seed;
} GrnnTrainConfig;

/**
 * Penalty options; when `use_override` is set, `override_value` replaces
 * the formula.
 */
typedef struct GrnnPenaltyConfig {
  double scale;
  bool use_override;
  double override_value;
} GrnnPenaltyConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *grnn_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *grnn_version(void);

struct GrnnTrainConfig grnn_train_config_default(void);

struct GrnnPenaltyConfig grnn_penalty_config_default(void);

/**
 * Copies `n×p` predictors (row-major) and `n` responses into a new dataset.
 *
 * # Safety
 * `x` must be valid for `n*p` reads, `y` for `n` reads, and `out` for one
 * write.
 */
enum GrnnStatus grnn_dataset_new(const double *x,
                                 const double *y,
                                 size_t n,
                                 size_t p,
                                 struct GrnnDataset **out);

/**
 * Generates data from synthetic model `model_id` (1..=7). A negative
 * `noise` selects the model's default noise level.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum GrnnStatus grnn_dataset_simulate(uint8_t model_id,
                                      size_t n,
                                      size_t p,
                                      double noise,
                                      uint64_t seed,
                                      struct GrnnDataset **out);

/**
 * # Safety
 * `ds` must be null or a handle from this library that was not yet freed.
 */
void grnn_dataset_free(struct GrnnDataset *ds);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t grnn_dataset_n(const struct GrnnDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t grnn_dataset_p(const struct GrnnDataset *ds);

/**
 * Columns of the true basis; 0 when the dataset has none.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t grnn_dataset_d_true(const struct GrnnDataset *ds);

/**
 * Copies the `p×d_true` true basis (row-major) into `buf`.
 *
 * # Safety
 * `ds` must be a live dataset handle and `buf` valid for `len` writes.
 */
enum GrnnStatus grnn_dataset_beta_true(const struct GrnnDataset *ds, double *buf, size_t len);

/**
 * Splits the dataset by a seeded shuffle (`train_cfg.seed`) with validation
 * fraction `val_frac`, then runs the dimension search. Null config pointers
 * select the defaults.
 *
 * # Safety
 * `ds` must be a live dataset handle, the config pointers null or valid, and
 * `out` valid for one write.
 */
enum GrnnStatus grnn_fit(const struct GrnnDataset *ds,
                         double val_frac,
                         const struct GrnnTrainConfig *train_cfg,
                         const struct GrnnPenaltyConfig *pen_cfg,
                         struct GrnnOutcome **out);

/**
 * # Safety
 * `o` must be null or a handle from [`grnn_fit`] that was not yet freed.
 */
void grnn_outcome_free(struct GrnnOutcome *o);

/**
 * Estimated structural dimension, or 0 for a null handle.
 *
 * # Safety
 * `o` must be null or a live outcome handle.
 */
size_t grnn_outcome_d_hat(const struct GrnnOutcome *o);

/**
 * # Safety
 * `o` must be null or a live outcome handle.
 */
size_t grnn_outcome_p(const struct GrnnOutcome *o);

/**
 * Penalty used by the search, or NaN for a null handle.
 *
 * # Safety
 * `o` must be null or a live outcome handle.
 */
double grnn_outcome_pen(const struct GrnnOutcome *o);

/**
 * Number of distinct widths trained.
 *
 * # Safety
 * `o` must be null or a live outcome handle.
 */
size_t grnn_outcome_nnl_calls(const struct GrnnOutcome *o);

/**
 * Copies the `p×d_hat` estimated basis (row-major) into `buf`.
 *
 * # Safety
 * `o` must be a live outcome handle and `buf` valid for `len` writes.
 */
enum GrnnStatus grnn_outcome_beta_hat(const struct GrnnOutcome *o, double *buf, size_t len);

/**
 * Predicts `n` responses for the row-major `n×p` inputs `x`.
 *
 * # Safety
 * `o` must be a live outcome handle, `x` valid for `n*p` reads and `y_out`
 * for `n` writes.
 */
enum GrnnStatus grnn_outcome_predict(const struct GrnnOutcome *o,
                                     const double *x,
                                     size_t n,
                                     double *y_out);

/**
 * Result as JSON; free the string with [`grnn_string_free`]. Null on error.
 *
 * # Safety
 * `o` must be null or a live outcome handle.
 */
char *grnn_outcome_to_json(const struct GrnnOutcome *o);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed at most once.
 */
void grnn_string_free(char *s);

/**
 * Vector correlation between the spans of `beta_true` (`p×d`) and
 * `beta_hat` (`p×d_hat`), both row-major.
 *
 * # Safety
 * Matrix pointers must be valid for the given sizes and `r_out` for one
 * write.
 */
enum GrnnStatus grnn_vector_correlation(const double *beta_true,
                                        size_t p,
                                        size_t d,
                                        const double *beta_hat,
                                        size_t d_hat,
                                        double *r_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRNN_SDR_H */
