#ifndef RRM_H
#define RRM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum RrmStatus {
  RRM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RRM_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or inconsistent.
   */
  RRM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A caller buffer is smaller than required.
   */
  RRM_STATUS_BUFFER_TOO_SMALL = 3,
  /**
   * The weights are all zero and cannot drive the surface.
   */
  RRM_STATUS_DEGENERATE_WEIGHTS = 4,
  /**
   * A numerical routine produced a non-finite value.
   */
  RRM_STATUS_NUMERICAL = 5,
  /**
   * Internal panic caught at the boundary.
   */
  RRM_STATUS_INTERNAL = 6,
} RrmStatus;

/**
 * Weight post-processing, matching the `weights.strategy` config values.
 */
typedef enum RrmStrategy {
  RRM_STRATEGY_NONE = 0,
  RRM_STRATEGY_MEAN = 1,
  RRM_STRATEGY_MIN = 2,
} RrmStrategy;

typedef enum RrmNormalization {
  /**
   * `H` scaled so that `tr(H H^H) / K = 1`.
   */
  RRM_NORMALIZATION_NORMALIZED = 0,
  /**
   * `H` unscaled.
   */
  RRM_NORMALIZATION_ABSOLUTE = 1,
} RrmNormalization;

typedef struct RrmHologram RrmHologram;

typedef struct RrmPaths RrmPaths;

/**
 * Surface geometry together with its reference wave.
 */
typedef struct RrmSurface RrmSurface;

typedef struct RrmWeights RrmWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rrm_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *rrm_version(void);

/**
 * Creates a `rows x cols` surface with half-wavelength spacing.
 *
 * `reference_sign` selects the reference phase `exp(+j k_sub d)` when
 * positive and `exp(-j k_sub d)` otherwise.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum RrmStatus rrm_surface_new(size_t rows,
                               size_t cols,
                               double carrier_hz,
                               double substrate_index,
                               double reference_amplitude,
                               double reference_phase_rad,
                               int32_t reference_sign,
                               struct RrmSurface **out);

/**
 * # Safety
 * `surface` must be null or a handle from [`rrm_surface_new`] not yet freed.
 */
void rrm_surface_free(struct RrmSurface *surface);

/**
 * Builds a path set from `count` parallel arrays. Delays are in seconds,
 * angles in degrees. With `unit_power` nonzero the gains are rescaled to
 * unit total power.
 *
 * # Safety
 * Each array must hold `count` readable values; `out` must be writable.
 */
enum RrmStatus rrm_paths_new(size_t count,
                             const double *amplitude,
                             const double *phase_rad,
                             const double *delay_s,
                             const double *theta_deg,
                             const double *phi_deg,
                             int32_t unit_power,
                             struct RrmPaths **out);

/**
 * # Safety
 * `paths` must be null or a handle from [`rrm_paths_new`] not yet freed.
 */
void rrm_paths_free(struct RrmPaths *paths);

/**
 * Records a hologram. `noise_power = 0` gives the noise-free recording;
 * otherwise `duration_symbols * samples_per_symbol` noisy samples are
 * averaged per element, drawn from `seed`.
 *
 * # Safety
 * `surface` and `paths` must be live handles; `out` must be writable.
 */
enum RrmStatus rrm_hologram_record(const struct RrmSurface *surface,
                                   const struct RrmPaths *paths,
                                   double user_amplitude,
                                   double noise_power,
                                   size_t duration_symbols,
                                   size_t samples_per_symbol,
                                   uint64_t seed,
                                   struct RrmHologram **out);

/**
 * Copies the recorded powers into `out` (row-major, `rows * cols` values).
 *
 * # Safety
 * `hologram` must be live; `out` must hold `len` writable values.
 */
enum RrmStatus rrm_hologram_values(const struct RrmHologram *hologram, double *out, size_t len);

/**
 * # Safety
 * `hologram` must be null or a live handle.
 */
void rrm_hologram_free(struct RrmHologram *hologram);

/**
 * Reindexes and post-processes a hologram into amplitude weights.
 * All-zero results are returned with status `DegenerateWeights` and a
 * valid handle.
 *
 * # Safety
 * `hologram` must be live; `out` must be writable.
 */
enum RrmStatus rrm_weights_from_hologram(const struct RrmHologram *hologram,
                                         enum RrmStrategy strategy,
                                         struct RrmWeights **out);

/**
 * Perfect-CSI holographic weights aimed at every path.
 *
 * # Safety
 * `surface` and `paths` must be live handles; `out` must be writable.
 */
enum RrmStatus rrm_weights_rhs(const struct RrmSurface *surface,
                               const struct RrmPaths *paths,
                               struct RrmWeights **out);

/**
 * Copies the weights into `out` (row-major, `rows * cols` values).
 *
 * # Safety
 * `weights` must be live; `out` must hold `len` writable values.
 */
enum RrmStatus rrm_weights_values(const struct RrmWeights *weights, double *out, size_t len);

/**
 * # Safety
 * `weights` must be null or a live handle.
 */
void rrm_weights_free(struct RrmWeights *weights);

/**
 * Axis lengths of the uniform pattern grid with step `step_deg`.
 *
 * # Safety
 * `theta_count` and `phi_count` must be writable.
 */
enum RrmStatus rrm_pattern_dims(double step_deg, size_t *theta_count, size_t *phi_count);

/**
 * Normalized far-field power in dB, `theta`-major, on the grid of
 * [`rrm_pattern_dims`].
 *
 * # Safety
 * Handles must be live; `out_db` must hold `len` writable values.
 */
enum RrmStatus rrm_pattern_db(const struct RrmSurface *surface,
                              const struct RrmWeights *weights,
                              double step_deg,
                              double *out_db,
                              size_t len);

/**
 * Per-symbol mutual information (bits) of the equivalent `K x K` block
 * channel at `count` SNR points.
 *
 * # Safety
 * Handles must be live; `snr_db` must hold `count` readable values and
 * `out_bits` `count` writable values.
 */
enum RrmStatus rrm_mutual_information(const struct RrmSurface *surface,
                                      const struct RrmPaths *paths,
                                      const struct RrmWeights *weights,
                                      size_t block_length,
                                      enum RrmNormalization normalization,
                                      const double *snr_db,
                                      size_t count,
                                      double *out_bits);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RRM_H */
