#ifndef RELEQ_H
#define RELEQ_H

/* Generated by cbindgen from crates/releq-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum ReleqStatus {
  RELEQ_STATUS_OK = 0,
  RELEQ_STATUS_NULL_POINTER = 1,
  RELEQ_STATUS_INVALID_UTF8 = 2,
  RELEQ_STATUS_CONFIG_ERROR = 3,
  RELEQ_STATUS_BUFFER_TOO_SMALL = 4,
  RELEQ_STATUS_INDEX_OUT_OF_RANGE = 5,
  RELEQ_STATUS_PANIC = 6,
  RELEQ_STATUS_DIMENSION_MISMATCH = 10,
  RELEQ_STATUS_INVALID_ALGEBRA = 11,
  RELEQ_STATUS_NOT_IN_TORUS = 12,
  RELEQ_STATUS_METRIC_DEGENERATE = 13,
  RELEQ_STATUS_LEFT_CHART = 14,
  RELEQ_STATUS_GEO_TOLERANCE = 15,
  RELEQ_STATUS_NON_FINITE = 16,
  RELEQ_STATUS_INVALID_SYSTEM = 17,
  RELEQ_STATUS_SYMMETRIC_POINT = 18,
  RELEQ_STATUS_ISOTROPY_NOT_IN_TORUS = 19,
  RELEQ_STATUS_IN_Z_MU = 20,
  RELEQ_STATUS_SINGULAR_INERTIA = 21,
  RELEQ_STATUS_TRIVIAL_ISOTROPY_FAILED = 22,
  RELEQ_STATUS_NOT_IN_SLICE = 23,
  RELEQ_STATUS_INVALID_FAMILY = 24,
  RELEQ_STATUS_NEWTON_DIVERGED = 25,
  RELEQ_STATUS_DELTA_DEGENERATE = 26,
  RELEQ_STATUS_STEP_FAILED = 27,
  RELEQ_STATUS_NON_ABELIAN = 28,
  RELEQ_STATUS_UNKNOWN_SYSTEM = 29,
  RELEQ_STATUS_BAD_PARAMS = 30,
} ReleqStatus;

/**
 * Stability class of a branch point.
 */
typedef enum ReleqStability {
  RELEQ_STABILITY_POSITIVE_DEFINITE = 0,
  RELEQ_STABILITY_NEGATIVE_DEFINITE = 1,
  RELEQ_STABILITY_INDEFINITE = 2,
  RELEQ_STABILITY_DEGENERATE = 3,
  RELEQ_STABILITY_NOT_COMPUTED = 4,
} ReleqStability;

/**
 * Per-point vector fields of a branch.
 */
typedef enum ReleqField {
  RELEQ_FIELD_U = 0,
  RELEQ_FIELD_MU1 = 1,
  RELEQ_FIELD_MU2 = 2,
  RELEQ_FIELD_Q = 3,
  RELEQ_FIELD_ZETA = 4,
  RELEQ_FIELD_BETA = 5,
} ReleqField;

/**
 * A continued branch of relative equilibria.
 */
typedef struct ReleqBranch ReleqBranch;

/**
 * A catalog system with its symmetry analysis, slice and momentum family.
 */
typedef struct ReleqProblem ReleqProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *releq_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Free the result
 * with [`releq_string_free`].
 */
char *releq_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void releq_string_free(char *s);

/**
 * Builds a catalog system with default parameters, numerics and
 * bifurcation inputs.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum ReleqStatus releq_problem_from_catalog(const char *name, struct ReleqProblem **out);

/**
 * Builds a problem from a JSON configuration document (same schema as the
 * command-line tool), using the first entry of the μ₁ grid.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ReleqStatus releq_problem_from_config_json(const char *json, struct ReleqProblem **out);

/**
 * # Safety
 * `p` must be NULL or a handle from this library that has not been freed.
 */
void releq_problem_free(struct ReleqProblem *p);

/**
 * Chart dimension, dim 𝔤, slice dimension and dim k₂. Any output pointer
 * may be NULL.
 *
 * # Safety
 * `p` must be a live handle; non-NULL outputs must be writable.
 */
enum ReleqStatus releq_problem_dims(const struct ReleqProblem *p,
                                    size_t *n,
                                    size_t *dim_g,
                                    size_t *dim_u,
                                    size_t *dim_k2);

/**
 * Replaces μ₁ (length dim 𝔤); the slice is rebuilt.
 *
 * # Safety
 * `p` must be a live handle; `mu1` must point to `len` doubles.
 */
enum ReleqStatus releq_problem_set_mu1(struct ReleqProblem *p, const double *mu1, size_t len);

/**
 * Newton seed search at τ = 0. A zero-length guess selects the default
 * start. Writes u⁰ (dim_u entries) and det Δ.
 *
 * # Safety
 * `p` must be a live handle; `guess` must point to `guess_len` doubles;
 * `u_out` must hold `u_cap` doubles; `u_len` and `det_delta` may be NULL.
 */
enum ReleqStatus releq_find_seed(const struct ReleqProblem *p,
                                 const double *guess,
                                 size_t guess_len,
                                 double *u_out,
                                 size_t u_cap,
                                 size_t *u_len,
                                 double *det_delta);

/**
 * Seed search followed by continuation to `tau_max` in `n_steps` steps.
 *
 * # Safety
 * `p` must be a live handle; `guess` must point to `guess_len` doubles;
 * `out` must be writable.
 */
enum ReleqStatus releq_branch_compute(const struct ReleqProblem *p,
                                      const double *guess,
                                      size_t guess_len,
                                      double tau_max,
                                      size_t n_steps,
                                      struct ReleqBranch **out);

/**
 * # Safety
 * `b` must be NULL or a handle from this library that has not been freed.
 */
void releq_branch_free(struct ReleqBranch *b);

/**
 * Number of points, or 0 for a NULL handle.
 *
 * # Safety
 * `b` must be NULL or a live handle.
 */
size_t releq_branch_len(const struct ReleqBranch *b);

/**
 * τ, residuals and stability of point `index`. Any output may be NULL.
 *
 * # Safety
 * `b` must be a live handle; non-NULL outputs must be writable.
 */
enum ReleqStatus releq_branch_point(const struct ReleqBranch *b,
                                    size_t index,
                                    double *tau,
                                    double *res_f,
                                    double *res_g,
                                    enum ReleqStability *stability);

/**
 * Copies one vector field of point `index` into `out`; `len` receives the
 * field length even when the buffer is too small.
 *
 * # Safety
 * `b` must be a live handle; `out` must hold `cap` doubles; `len` may be NULL.
 */
enum ReleqStatus releq_branch_field(const struct ReleqBranch *b,
                                    size_t index,
                                    enum ReleqField field,
                                    double *out,
                                    size_t cap,
                                    size_t *len);

/**
 * Classifies every point; fails with `NonAbelian` for nonabelian groups.
 *
 * # Safety
 * `p` must be the live handle the branch was computed from; `b` a live handle.
 */
enum ReleqStatus releq_branch_classify(const struct ReleqProblem *p, struct ReleqBranch *b);

/**
 * Branch as CSV text; free with [`releq_string_free`]. NULL on failure.
 *
 * # Safety
 * `b` must be a live handle.
 */
char *releq_branch_to_csv(const struct ReleqBranch *b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELEQ_H */
