#ifndef FAIRPCA_H
#define FAIRPCA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FpcaLineSearch {
  FPCA_LINE_SEARCH_BACKTRACKING = 0,
  FPCA_LINE_SEARCH_INV_SQRT = 1,
} FpcaLineSearch;

typedef enum FpcaStatus {
  FPCA_STATUS_OK = 0,
  FPCA_STATUS_NULL_POINTER = 1,
  FPCA_STATUS_INVALID_ARGUMENT = 2,
  FPCA_STATUS_DIMENSION = 3,
  FPCA_STATUS_NUMERIC = 4,
  FPCA_STATUS_DATA = 5,
  FPCA_STATUS_CONFIG = 6,
  FPCA_STATUS_IO = 7,
  FPCA_STATUS_PANIC = 8,
} FpcaStatus;

typedef enum FpcaMode {
  FPCA_MODE_PAIRWISE = 0,
  FPCA_MODE_SINGLE = 1,
} FpcaMode;

typedef enum FpcaPenalty {
  FPCA_PENALTY_SQUARED = 0,
  FPCA_PENALTY_EXPONENTIAL = 1,
} FpcaPenalty;

/**
 * A fair PCA problem built from grouped data.
 */
typedef struct FpcaProblem FpcaProblem;

/**
 * The outcome of one solve.
 */
typedef struct FpcaResult FpcaResult;

/**
 * Solver settings. Start from [`fpca_solver_config_default`].
 */
typedef struct FpcaSolverConfig {
  size_t max_iters;
  double beta;
  enum FpcaLineSearch line_search;
  double stationarity_tol;
  uint64_t seed;
  bool normalize;
  /**
   * Start from plain PCA instead of a seeded random basis.
   */
  bool pca_init;
} FpcaSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *fpca_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fpca_version(void);

struct FpcaSolverConfig fpca_solver_config_default(void);

/**
 * Builds a problem from `n` rows of `d` features and a group id per row.
 *
 * Group ids must cover `0..k` with no empty group. A negative or NaN
 * `alpha` selects the coefficient derived from the group spectra.
 *
 * # Safety
 * `data` must point to `n * d` readable doubles and `group_ids` to `n`
 * readable values; `out` must be a valid place to store a handle.
 */
enum FpcaStatus fpca_problem_new(const double *data,
                                 size_t n,
                                 size_t d,
                                 const size_t *group_ids,
                                 size_t k,
                                 size_t r,
                                 enum FpcaMode mode,
                                 enum FpcaPenalty penalty,
                                 double alpha,
                                 struct FpcaProblem **out);

/**
 * # Safety
 * `problem` must be NULL or a handle from [`fpca_problem_new`] not yet freed.
 */
void fpca_problem_free(struct FpcaProblem *problem);

/**
 * Number of objectives; 0 for a NULL handle.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
size_t fpca_problem_objective_count(const struct FpcaProblem *problem);

/**
 * Regularization coefficient in use; NaN for a NULL handle.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
double fpca_problem_alpha(const struct FpcaProblem *problem);

/**
 * Objective values at the `d × r` row-major point `u`.
 *
 * # Safety
 * `problem` must be a live handle, `u` must hold `d * r` doubles and `out`
 * must have room for `out_len` doubles.
 */
enum FpcaStatus fpca_problem_evaluate(const struct FpcaProblem *problem,
                                      const double *u,
                                      double *out,
                                      size_t out_len);

/**
 * Plain PCA basis of the pooled data, `d × r` row-major.
 *
 * # Safety
 * `problem` must be a live handle and `out` must have room for `out_len` doubles.
 */
enum FpcaStatus fpca_plain_pca(const struct FpcaProblem *problem, double *out, size_t out_len);

/**
 * Runs the solver. `config` may be NULL for defaults.
 *
 * # Safety
 * `problem` must be a live handle, `config` NULL or readable, and `out` a
 * valid place to store a handle.
 */
enum FpcaStatus fpca_solve(const struct FpcaProblem *problem,
                           const struct FpcaSolverConfig *config,
                           struct FpcaResult **out);

/**
 * # Safety
 * `result` must be NULL or a handle from [`fpca_solve`] not yet freed.
 */
void fpca_result_free(struct FpcaResult *result);

/**
 * Solved basis, `d × r` row-major.
 *
 * # Safety
 * `result` must be a live handle and `out` must have room for `out_len` doubles.
 */
enum FpcaStatus fpca_result_subspace(const struct FpcaResult *result, double *out, size_t out_len);

/**
 * Final objective values.
 *
 * # Safety
 * `result` must be a live handle and `out` must have room for `out_len` doubles.
 */
enum FpcaStatus fpca_result_objectives(const struct FpcaResult *result,
                                       double *out,
                                       size_t out_len);

/**
 * Iterations run; 0 for a NULL handle.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t fpca_result_iterations(const struct FpcaResult *result);

/**
 * Whether the run stopped at a Pareto-stationary point.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
bool fpca_result_stationary(const struct FpcaResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAIRPCA_H */
