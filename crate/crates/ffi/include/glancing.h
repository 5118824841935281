#ifndef GLANCING_H
#define GLANCING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum GlcStatus {
  GLC_STATUS_OK = 0,
  GLC_STATUS_NULL_POINTER = 1,
  GLC_STATUS_INVALID_ARGUMENT = 2,
  GLC_STATUS_CONFIG = 3,
  GLC_STATUS_SOLVER = 4,
  GLC_STATUS_IO = 5,
  GLC_STATUS_CHECK_FAILED = 6,
  GLC_STATUS_PANIC = 7,
} GlcStatus;

/**
 * A validated experiment configuration.
 */
typedef struct GlcConfig GlcConfig;

/**
 * A model with its solved phase and amplitude jets.
 */
typedef struct GlcModel GlcModel;

/**
 * Result rows of a sweep.
 */
typedef struct GlcSweep GlcSweep;

/**
 * One measured (h, μ, s, k) point. `ok` is 0 for rows whose solve failed;
 * their error fields are NaN.
 */
typedef struct GlcSweepRow {
  double h;
  double mu;
  size_t s;
  size_t k;
  double error_norm;
  double bound_value;
  double ratio;
  size_t grid;
  int ok;
} GlcSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *glc_last_error(void);

/**
 * Library version as a static string.
 */
const char *glc_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void glc_string_free(char *s);

/**
 * Parses a model table (`d`, `order`, `m = { "k,j" = "expr" }` or a
 * `[boundary]` table), instantiates it at `mu` and solves the jets.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GlcStatus glc_model_parse(const char *toml, double mu, struct GlcModel **out);

/**
 * # Safety
 * `model` must come from [`glc_model_parse`] and not have been freed. Null is ignored.
 */
void glc_model_free(struct GlcModel *model);

/**
 * Truncation order M.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum GlcStatus glc_model_order(const struct GlcModel *model, size_t *out);

/**
 * Phase coefficient φ_k (1 ≤ k ≤ M) as text. Free with [`glc_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum GlcStatus glc_model_phase(const struct GlcModel *model, size_t k, char **out);

/**
 * Amplitude coefficient a_{k,j} as text. Free with [`glc_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum GlcStatus glc_model_amplitude(const struct GlcModel *model, size_t k, size_t j, char **out);

/**
 * Runs the exact residual, membership and grading checks. Sets `passed` to 1
 * when all hold and 0 otherwise. A failed check is not an error status, but
 * its location is reported through [`glc_last_error`].
 * With `corrupt` nonzero one amplitude is overwritten first.
 *
 * # Safety
 * `model` must be a live handle and `passed` a valid pointer.
 */
enum GlcStatus glc_model_verify(const struct GlcModel *model, int corrupt, int *passed);

/**
 * Exact model DN value at one frequency for m = c t (Airy functions).
 *
 * # Safety
 * `out_re` and `out_im` must be valid pointers.
 */
enum GlcStatus glc_airy_dn(double eta1,
                           double mu,
                           double c_re,
                           double c_im,
                           double h,
                           double *out_re,
                           double *out_im);

/**
 * The bound h^{s+1} |μ|^{−(3s+2−k)/2}.
 */
double glc_bound_value(double h, double mu, size_t s, size_t k);

/**
 * Parses and validates an experiment file body.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GlcStatus glc_config_parse(const char *toml, struct GlcConfig **out);

/**
 * # Safety
 * `cfg` must come from [`glc_config_parse`] and not have been freed. Null is ignored.
 */
void glc_config_free(struct GlcConfig *cfg);

/**
 * Runs the sweep described by `cfg`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum GlcStatus glc_sweep_run(const struct GlcConfig *cfg, struct GlcSweep **out);

/**
 * # Safety
 * `sweep` must come from [`glc_sweep_run`] and not have been freed. Null is ignored.
 */
void glc_sweep_free(struct GlcSweep *sweep);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `sweep` must be null or a live handle.
 */
size_t glc_sweep_len(const struct GlcSweep *sweep);

/**
 * Copies row `i` into `out`.
 *
 * # Safety
 * `sweep` must be a live handle and `out` a valid pointer.
 */
enum GlcStatus glc_sweep_row(const struct GlcSweep *sweep, size_t i, struct GlcSweepRow *out);

/**
 * Writes the rows as CSV to `path`.
 *
 * # Safety
 * `sweep` must be a live handle and `path` a NUL-terminated string.
 */
enum GlcStatus glc_sweep_write_csv(const struct GlcSweep *sweep, const char *path);

/**
 * Fits the scaling exponents and sets `passed` to 1 when every (s, k) group
 * is within tolerance. The summary text goes to `summary` when it is non-null
 * (free with [`glc_string_free`]).
 *
 * # Safety
 * `sweep` must be a live handle, `passed` valid, `summary` null or valid.
 */
enum GlcStatus glc_sweep_fit(const struct GlcSweep *sweep, int *passed, char **summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLANCING_H */
