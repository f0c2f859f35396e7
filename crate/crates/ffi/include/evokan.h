#ifndef EVOKAN_H
#define EVOKAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The nonzero values 2, 3 and 4 match the command-line exit codes.
 */
typedef enum EvkStatus {
  EVK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EVK_STATUS_NULL_ARGUMENT = 1,
  /**
   * Invalid input: bad sizes, mismatched grids, unsupported configuration.
   */
  EVK_STATUS_INVALID = 2,
  /**
   * Singular system or non-finite values.
   */
  EVK_STATUS_NUMERICAL = 3,
  /**
   * File missing, unreadable, or malformed.
   */
  EVK_STATUS_IO = 4,
  /**
   * A caller-supplied buffer is too small; the needed length was written.
   */
  EVK_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Internal failure; the library state is unchanged.
   */
  EVK_STATUS_PANIC = 6,
} EvkStatus;

/**
 * A network together with its parameters.
 */
typedef struct EvkNetwork EvkNetwork;

/**
 * A sampled field on a periodic grid.
 */
typedef struct EvkSnapshot EvkSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t evk_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *evk_version(void);

/**
 * Load an EVKN file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EvkStatus evk_network_load(const char *path, struct EvkNetwork **out);

/**
 * # Safety
 * `net` must be null or a handle from [`evk_network_load`] not yet freed.
 */
void evk_network_free(struct EvkNetwork *net);

/**
 * Input dimension, output count and parameter count.
 *
 * # Safety
 * `net` must be a live handle; the output pointers must be writable.
 */
enum EvkStatus evk_network_dims(const struct EvkNetwork *net,
                                size_t *input_dim,
                                size_t *output_dim,
                                size_t *n_params);

/**
 * Evaluate the network at `n_points` points stored row by row in `points`
 * (`n_points × input_dim` values). Writes `n_points × output_dim` values.
 *
 * # Safety
 * `points` must hold `points_len` doubles and `out` must hold `out_len`.
 */
enum EvkStatus evk_network_forward(const struct EvkNetwork *net,
                                   const double *points,
                                   size_t points_len,
                                   size_t n_points,
                                   double *out,
                                   size_t out_len);

/**
 * Copy the parameter vector into `out`.
 *
 * # Safety
 * `out` must hold `out_len` doubles.
 */
enum EvkStatus evk_network_params(const struct EvkNetwork *net, double *out, size_t out_len);

/**
 * Load an EVKS file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EvkStatus evk_snapshot_load(const char *path, struct EvkSnapshot **out);

/**
 * Build a snapshot from component-major values. `ny = 0` means 1D.
 *
 * # Safety
 * `values` must hold `values_len` doubles; `out` must be writable.
 */
enum EvkStatus evk_snapshot_new(size_t nx,
                                size_t ny,
                                size_t components,
                                double t,
                                const double *values,
                                size_t values_len,
                                struct EvkSnapshot **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `snap` a live handle.
 */
enum EvkStatus evk_snapshot_save(const struct EvkSnapshot *snap, const char *path);

/**
 * # Safety
 * `snap` must be null or a live handle.
 */
void evk_snapshot_free(struct EvkSnapshot *snap);

/**
 * Grid size (`ny = 0` for 1D), component count and time.
 *
 * # Safety
 * `snap` must be a live handle; the output pointers must be writable.
 */
enum EvkStatus evk_snapshot_dims(const struct EvkSnapshot *snap,
                                 size_t *nx,
                                 size_t *ny,
                                 size_t *components,
                                 double *t);

/**
 * Copy all values (component-major, `x` fastest) into `out`.
 *
 * # Safety
 * `out` must hold `out_len` doubles.
 */
enum EvkStatus evk_snapshot_values(const struct EvkSnapshot *snap, double *out, size_t out_len);

/**
 * Root-mean-square difference of two snapshots on the same grid and time.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum EvkStatus evk_l2_error(const struct EvkSnapshot *a, const struct EvkSnapshot *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOKAN_H */
