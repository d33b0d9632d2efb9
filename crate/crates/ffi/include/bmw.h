#ifndef BMW_H
#define BMW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BmwStatus {
  BMW_STATUS_OK = 0,
  BMW_STATUS_NULL_POINTER = 1,
  BMW_STATUS_INVALID_ARGUMENT = 2,
  BMW_STATUS_DOMAIN = 3,
  BMW_STATUS_NON_CONVERGENCE = 4,
  BMW_STATUS_BUFFER_TOO_SMALL = 5,
  BMW_STATUS_PANIC = 6,
} BmwStatus;

typedef enum BmwSearchMode {
  BMW_SEARCH_MODE_UNIFORM = 0,
  BMW_SEARCH_MODE_FREE = 1,
} BmwSearchMode;

/**
 * Opaque channel parameters.
 */
typedef struct BmwChannel BmwChannel;

/**
 * Opaque code design.
 */
typedef struct BmwDesign BmwDesign;

typedef struct BmwGameResult {
  /**
   * 1-based interval index of Eve's best strategy.
   */
  size_t optimal_interval;
  double secrecy_rate;
} BmwGameResult;

typedef struct BmwTwoLevelResult {
  double secrecy_rate;
  double first_branch;
  double second_branch;
} BmwTwoLevelResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a channel handle. Free it with [`bmw_channel_free`].
 *
 * # Safety
 * `out_channel` must be null or valid for writes.
 */
enum BmwStatus bmw_channel_new(double lambda_m,
                               double lambda_w,
                               double power,
                               double jam,
                               double noise_var,
                               struct BmwChannel **out_channel);

/**
 * # Safety
 * `channel` must be null or a handle from [`bmw_channel_new`] not yet freed.
 */
void bmw_channel_free(struct BmwChannel *channel);

/**
 * Creates a design with `len` thresholds and `len` power-splitting
 * coefficients (`len + 1` levels). Free it with [`bmw_design_free`].
 *
 * # Safety
 * `thresholds` and `alphas` must each hold `len` readable values (they may
 * be null when `len` is 0); `out_design` must be null or valid for writes.
 */
enum BmwStatus bmw_design_new(const double *thresholds,
                              const double *alphas,
                              size_t len,
                              struct BmwDesign **out_design);

/**
 * # Safety
 * `design` must be null or a handle from this library not yet freed.
 */
void bmw_design_free(struct BmwDesign *design);

/**
 * Number of levels of a design, 0 for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
size_t bmw_design_levels(const struct BmwDesign *design);

/**
 * Copies the thresholds and alphas of a design (`levels - 1` values each).
 *
 * # Safety
 * Buffers must hold `len` writable values each.
 */
enum BmwStatus bmw_design_parameters(const struct BmwDesign *design,
                                     double *thresholds,
                                     double *alphas,
                                     size_t len);

/**
 * `E[log2(1 + a·h / (b + c·h))]` for `h ~ Exp(lambda)`.
 *
 * # Safety
 * `out_rate` must be null or valid for writes.
 */
enum BmwStatus bmw_fading_log_rate(double lambda, double a, double b, double c, double *out_rate);

/**
 * Worst-case Wyner rate with effective jam power `jam_power`; pass a
 * negative value to use the channel's jamming budget.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum BmwStatus bmw_wcs_secrecy_rate(const struct BmwChannel *channel,
                                    double jam_power,
                                    double *out_rate);

/**
 * Writes the level rates `R_1 … R_n` into `buf` (capacity `len`).
 *
 * # Safety
 * Handles must be live; `buf` must hold `len` writable values.
 */
enum BmwStatus bmw_level_rates(const struct BmwChannel *channel,
                               const struct BmwDesign *design,
                               double *buf,
                               size_t len);

/**
 * Game value of a design.
 *
 * # Safety
 * Handles must be live; `out_result` must be null or valid for writes.
 */
enum BmwStatus bmw_solve_game(const struct BmwChannel *channel,
                              const struct BmwDesign *design,
                              struct BmwGameResult *out_result);

/**
 * Writes the key rate of every interval into `buf` (capacity `len`).
 *
 * # Safety
 * Handles must be live; `buf` must hold `len` writable values.
 */
enum BmwStatus bmw_game_key_rates(const struct BmwChannel *channel,
                                  const struct BmwDesign *design,
                                  double *buf,
                                  size_t len);

/**
 * Two-level game value by direct case analysis.
 *
 * # Safety
 * `channel` must be live; `out_result` must be null or valid for writes.
 */
enum BmwStatus bmw_two_level_solve(const struct BmwChannel *channel,
                                   double q1,
                                   double alpha1,
                                   struct BmwTwoLevelResult *out_result);

/**
 * Optimizes an `n`-level design. On success `*out_design` receives a new
 * handle owned by the caller.
 *
 * # Safety
 * `channel` must be live; out-pointers must be null or valid for writes.
 */
enum BmwStatus bmw_optimize_design(const struct BmwChannel *channel,
                                   size_t n,
                                   enum BmwSearchMode mode,
                                   size_t budget,
                                   struct BmwDesign **out_design,
                                   double *out_rate);

/**
 * Copies the last error message of this thread into `buf` as a
 * NUL-terminated string (truncated to fit) and returns the full message
 * length excluding the terminator. Pass a null `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or hold `len` writable bytes.
 */
size_t bmw_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bmw_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BMW_H */
