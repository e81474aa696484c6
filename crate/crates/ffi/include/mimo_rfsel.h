#ifndef MIMO_RFSEL_H
#define MIMO_RFSEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MrsStatus {
  MRS_STATUS_OK = 0,
  MRS_STATUS_NULL_POINTER = 1,
  MRS_STATUS_INVALID_ARGUMENT = 2,
  MRS_STATUS_INFEASIBLE = 3,
  MRS_STATUS_SINGULAR = 4,
  MRS_STATUS_CAPACITY = 5,
  MRS_STATUS_BUFFER_TOO_SMALL = 6,
  MRS_STATUS_PANIC = 7,
} MrsStatus;

/**
 * Channel realization: a K x N fading matrix plus per-user large-scale gains.
 */
typedef struct MrsChannel MrsChannel;

/**
 * Outcome of an antenna selection run.
 */
typedef struct MrsSelection MrsSelection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code; unknown codes get a generic text.
 */
const char *mrs_status_message(int32_t status);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next `mrs_*` call on the same thread.
 */
const char *mrs_last_error(void);

/**
 * Draws users uniformly in an annulus and an i.i.d. Rayleigh channel from
 * the substream `(master_seed, trial_index)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MrsStatus mrs_channel_draw(size_t users,
                                size_t antennas,
                                double alpha,
                                double cell_radius,
                                double min_distance,
                                uint64_t master_seed,
                                uint64_t trial_index,
                                struct MrsChannel **out);

/**
 * Builds a channel from a row-major K x N matrix given as separate real and
 * imaginary arrays, and K large-scale gains (`NULL` for unit gains).
 *
 * # Safety
 * `re` and `im` must point to `users * antennas` doubles, `gains` to `users`
 * doubles or be null, and `out` must be writable.
 */
enum MrsStatus mrs_channel_from_parts(size_t users,
                                      size_t antennas,
                                      const double *re,
                                      const double *im,
                                      const double *gains,
                                      double alpha,
                                      struct MrsChannel **out);

/**
 * Number of users (rows), or 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live handle.
 */
size_t mrs_channel_users(const struct MrsChannel *ch);

/**
 * Number of antennas (columns), or 0 for a null handle.
 *
 * # Safety
 * `ch` must be null or a live handle.
 */
size_t mrs_channel_antennas(const struct MrsChannel *ch);

/**
 * # Safety
 * `ch` must be null or a handle from `mrs_channel_*` not freed before.
 */
void mrs_channel_free(struct MrsChannel *ch);

/**
 * Greedy RF-chain count and antenna selection. A nonzero `keep_best`
 * returns the best visited point instead of the first-decrease stop.
 *
 * # Safety
 * `ch` must be a live handle and `out` writable.
 */
enum MrsStatus mrs_select_greedy(const struct MrsChannel *ch,
                                 double p_max,
                                 double p_c,
                                 int32_t keep_best,
                                 struct MrsSelection **out);

/**
 * Exhaustive search over all subsets of feasible size, refusing to enumerate
 * more than `cap` subsets.
 *
 * # Safety
 * `ch` must be a live handle and `out` writable.
 */
enum MrsStatus mrs_select_bfs(const struct MrsChannel *ch,
                              double p_max,
                              double p_c,
                              uint64_t cap,
                              struct MrsSelection **out);

/**
 * Uniformly random subset of `chains` antennas with water-filling.
 *
 * # Safety
 * `ch` must be a live handle and `out` writable.
 */
enum MrsStatus mrs_select_random(const struct MrsChannel *ch,
                                 double p_max,
                                 double p_c,
                                 size_t chains,
                                 uint64_t seed,
                                 struct MrsSelection **out);

/**
 * Selected chain count, or 0 for a null handle.
 *
 * # Safety
 * `sel` must be null or a live handle.
 */
size_t mrs_selection_chains(const struct MrsSelection *sel);

/**
 * Sum-rate in bit/s/Hz, or NaN for a null handle.
 *
 * # Safety
 * `sel` must be null or a live handle.
 */
double mrs_selection_rate(const struct MrsSelection *sel);

/**
 * ZF normalization factor of the selected subset, or NaN for a null handle.
 *
 * # Safety
 * `sel` must be null or a live handle.
 */
double mrs_selection_eta_sq(const struct MrsSelection *sel);

/**
 * Total transmit power, or NaN for a null handle.
 *
 * # Safety
 * `sel` must be null or a live handle.
 */
double mrs_selection_p_out(const struct MrsSelection *sel);

/**
 * Copies the ascending antenna indices into `buf`. `*len` always receives the
 * required length; `MRS_STATUS_BUFFER_TOO_SMALL` is returned if `cap` is short.
 *
 * # Safety
 * `sel` must be a live handle, `buf` must hold `cap` elements, `len` writable.
 */
enum MrsStatus mrs_selection_subset(const struct MrsSelection *sel,
                                    size_t *buf,
                                    size_t cap,
                                    size_t *len);

/**
 * Copies the per-user transmit powers into `buf`, with the same length
 * protocol as [`mrs_selection_subset`].
 *
 * # Safety
 * `sel` must be a live handle, `buf` must hold `cap` elements, `len` writable.
 */
enum MrsStatus mrs_selection_powers(const struct MrsSelection *sel,
                                    double *buf,
                                    size_t cap,
                                    size_t *len);

/**
 * # Safety
 * `sel` must be null or a handle from `mrs_select_*` not freed before.
 */
void mrs_selection_free(struct MrsSelection *sel);

/**
 * Chain count maximizing the closed-form average sum-rate.
 *
 * # Safety
 * `out` must be writable.
 */
enum MrsStatus mrs_optimal_rf_count(size_t users, double p_max, double p_c, size_t *out);

/**
 * Closed-form average sum-rate with `chains` active RF chains.
 *
 * # Safety
 * `out` must be writable.
 */
enum MrsStatus mrs_average_sum_rate(size_t chains,
                                    size_t users,
                                    double p_max,
                                    double p_c,
                                    double *out);

/**
 * Water-filling of `budget` over `len` positive effective gains; writes `len`
 * powers to `powers`.
 *
 * # Safety
 * `gains` must hold `len` doubles and `powers` room for `len` doubles.
 */
enum MrsStatus mrs_waterfill(const double *gains, size_t len, double budget, double *powers);

/**
 * Operation-count estimate as a decimal string, released with
 * [`mrs_string_free`]. `algo` takes an [`MrsComplexityAlgo`] value.
 *
 * # Safety
 * `out` must be writable.
 */
enum MrsStatus mrs_complexity_estimate(size_t antennas,
                                       size_t users,
                                       size_t max_chains,
                                       uint32_t algo,
                                       char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not freed before.
 */
void mrs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMO_RFSEL_H */
