#ifndef SWMIMO_H
#define SWMIMO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SwmStatus {
  SWM_STATUS_OK = 0,
  SWM_STATUS_NULL_POINTER = 1,
  SWM_STATUS_INVALID_ARGUMENT = 2,
  SWM_STATUS_CONFIG_ERROR = 3,
  SWM_STATUS_NUMERICAL_ERROR = 4,
  SWM_STATUS_IO_ERROR = 5,
  SWM_STATUS_BUFFER_TOO_SMALL = 6,
  SWM_STATUS_PANIC = 7,
} SwmStatus;

typedef enum SwmRegime {
  SWM_REGIME_TIGHT = 0,
  SWM_REGIME_WEAK = 1,
  SWM_REGIME_DECOUPLED = 2,
} SwmRegime;

/**
 * Which matrix of a snapshot to copy out.
 */
typedef enum SwmMatrix {
  /**
   * Whitened equivalent channel `H̃`.
   */
  SWM_MATRIX_CHANNEL = 0,
  /**
   * Equivalent LoS part.
   */
  SWM_MATRIX_LOS = 1,
  /**
   * Equivalent scattered part.
   */
  SWM_MATRIX_SCATTERED = 2,
  /**
   * Physical channel `H_MIMO`.
   */
  SWM_MATRIX_PHYSICAL = 3,
  /**
   * Equivalent receive correlation `C_R`.
   */
  SWM_MATRIX_RX_CORRELATION = 4,
  /**
   * Equivalent transmit correlation `C_T`.
   */
  SWM_MATRIX_TX_CORRELATION = 5,
} SwmMatrix;

/**
 * One trial evaluated at a set of grid sub-channels.
 */
typedef struct SwmRealization SwmRealization;

/**
 * Configured simulator for one coupling regime.
 */
typedef struct SwmSimulator SwmSimulator;

typedef struct SwmComplex {
  double re;
  double im;
} SwmComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *swm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *swm_version(void);

/**
 * Simulator with the built-in default scenario. `regime` is a
 * [`SwmRegime`] value.
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer.
 */
enum SwmStatus swm_simulator_new_default(uint32_t regime, struct SwmSimulator **out);

/**
 * Simulator from a TOML scenario held in a NUL-terminated UTF-8 string.
 *
 * # Safety
 * `toml` must be null or a valid C string; `out` as in
 * [`swm_simulator_new_default`].
 */
enum SwmStatus swm_simulator_from_toml(const char *toml,
                                       uint32_t regime,
                                       struct SwmSimulator **out);

/**
 * Releases a simulator. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a pointer obtained from this library that has not
 * been freed.
 */
void swm_simulator_free(struct SwmSimulator *sim);

/**
 * Number of grid sub-channels.
 *
 * # Safety
 * `sim` must be a live simulator; `out` writable or null.
 */
enum SwmStatus swm_simulator_grid_len(const struct SwmSimulator *sim, size_t *out);

/**
 * Center frequency of grid sub-channel `index` in Hz.
 *
 * # Safety
 * As [`swm_simulator_grid_len`].
 */
enum SwmStatus swm_simulator_frequency(const struct SwmSimulator *sim, size_t index, double *out);

/**
 * Receive and transmit element counts.
 *
 * # Safety
 * `sim` must be a live simulator; `n_r` and `n_t` writable or null.
 */
enum SwmStatus swm_simulator_dims(const struct SwmSimulator *sim, size_t *n_r, size_t *n_t);

/**
 * Channel of trial `trial` at the strictly increasing grid indices
 * `indices[0..count]`.
 *
 * # Safety
 * `sim` must be a live simulator, `indices` must point to `count` values
 * (or be null when `count` is 0) and `out` must be writable.
 */
enum SwmStatus swm_simulator_realize(const struct SwmSimulator *sim,
                                     uint64_t trial,
                                     const size_t *indices,
                                     size_t count,
                                     struct SwmRealization **out);

/**
 * Releases a realization. Null is ignored.
 *
 * # Safety
 * `r` must be null or a pointer obtained from this library that has not
 * been freed.
 */
void swm_realization_free(struct SwmRealization *r);

/**
 * Number of snapshots in a realization.
 *
 * # Safety
 * `r` must be a live realization; `out` writable or null.
 */
enum SwmStatus swm_realization_len(const struct SwmRealization *r, size_t *out);

/**
 * Frequency, K-factor and path gain of snapshot `k`. Any output pointer
 * may be null.
 *
 * # Safety
 * `r` must be a live realization; non-null outputs must be writable.
 */
enum SwmStatus swm_realization_info(const struct SwmRealization *r,
                                    size_t k,
                                    double *freq_hz,
                                    double *k_linear,
                                    double *path_gain);

/**
 * Copies the [`SwmMatrix`] selected by `which` from snapshot `k`
 * column-major into `buf`, which must hold at least `rows·cols` entries.
 *
 * # Safety
 * `r` must be a live realization and `buf` must point to `len` writable
 * entries.
 */
enum SwmStatus swm_realization_matrix(const struct SwmRealization *r,
                                      size_t k,
                                      uint32_t which,
                                      struct SwmComplex *buf,
                                      size_t len);

/**
 * Eigen-SNRs (linear, descending) of snapshot `k` with `power` watts on
 * the sub-channel, split equally over the active modes. Writes
 * `min(n_r, n_t)` values.
 *
 * # Safety
 * `r` must be a live realization and `buf` must point to `len` writable
 * values.
 */
enum SwmStatus swm_realization_eigen_snrs(const struct SwmRealization *r,
                                          size_t k,
                                          double power,
                                          double *buf,
                                          size_t len);

/**
 * Frequency correlation at integer lag.
 *
 * # Safety
 * `out` must be writable or null.
 */
enum SwmStatus swm_jakes_entry(size_t lag, double delta_f_hz, double tau_rms_s, double *out);

/**
 * Mean and variance of the K-factor in dB at `f_ghz`. Either output may be
 * null.
 *
 * # Safety
 * Non-null outputs must be writable.
 */
enum SwmStatus swm_k_factor_moments(double f_ghz, double *mean_db, double *var_db);

/**
 * Chu lowest-mode self impedance of an element of radius `radius_m`.
 *
 * # Safety
 * `out` must be writable or null.
 */
enum SwmStatus swm_chu_self_impedance(double f_hz,
                                      double radius_m,
                                      double r_rad_ohm,
                                      struct SwmComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWMIMO_H */
