#ifndef FLUIDCC_H
#define FLUIDCC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FccAlgorithm {
  FCC_ALGORITHM_RENO = 0,
  FCC_ALGORITHM_CUBIC = 1,
} FccAlgorithm;

typedef enum FccEventKind {
  FCC_EVENT_KIND_LOSS = 0,
  FCC_EVENT_KIND_INDICATION = 1,
} FccEventKind;

typedef enum FccLossModel {
  FCC_LOSS_MODEL_AGGREGATE = 0,
  FCC_LOSS_MODEL_PER_FLOW = 1,
} FccLossModel;

typedef enum FccStatus {
  FCC_STATUS_OK = 0,
  FCC_STATUS_NULL_POINTER = 1,
  FCC_STATUS_INVALID_ARGUMENT = 2,
  FCC_STATUS_NUMERIC_FAILURE = 3,
  FCC_STATUS_INDEX_OUT_OF_RANGE = 4,
  FCC_STATUS_PANIC = 5,
} FccStatus;

/**
 * Opaque system parameters.
 */
typedef struct FccParams FccParams;

/**
 * Opaque simulation result.
 */
typedef struct FccSimResult FccSimResult;

/**
 * Opaque fluid trajectory.
 */
typedef struct FccTrajectory FccTrajectory;

typedef struct FccFixedPoint {
  double window;
  double since_loss;
  double loss_prob;
} FccFixedPoint;

typedef struct FccSample {
  double t;
  double w_max;
  double since_loss;
  double window;
  double loss_prob;
} FccSample;

typedef struct FccEvent {
  enum FccEventKind kind;
  double time;
  size_t flow;
  double window_before;
  double window_after;
} FccEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length, or 0
 * when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t fcc_last_error(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum FccStatus fcc_params_new(double capacity,
                              double delay,
                              double decrease,
                              double scale,
                              size_t flows,
                              struct FccParams **out);

/**
 * # Safety
 * `params` must be null or a handle from `fcc_params_new` not yet freed.
 */
void fcc_params_free(struct FccParams *params);

/**
 * Steady state of the chosen algorithm.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum FccStatus fcc_fixed_point(const struct FccParams *params,
                               enum FccAlgorithm alg,
                               struct FccFixedPoint *out);

/**
 * Integrates the fluid model from a constant history `(w_max, since_loss)`,
 * keeping every `record_every`-th step.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum FccStatus fcc_integrate(const struct FccParams *params,
                             enum FccAlgorithm alg,
                             double w_max,
                             double since_loss,
                             double t_end,
                             double step,
                             size_t record_every,
                             struct FccTrajectory **out);

/**
 * # Safety
 * `traj` must be a live handle and `len` writable.
 */
enum FccStatus fcc_trajectory_len(const struct FccTrajectory *traj, size_t *len);

/**
 * # Safety
 * `traj` must be a live handle and `out` writable.
 */
enum FccStatus fcc_trajectory_sample(const struct FccTrajectory *traj,
                                     size_t index,
                                     struct FccSample *out);

/**
 * # Safety
 * `traj` must be null or a handle from `fcc_integrate` not yet freed.
 */
void fcc_trajectory_free(struct FccTrajectory *traj);

/**
 * Runs the Poisson-loss simulator. `w_max` and `since_loss` hold one entry
 * per flow.
 *
 * # Safety
 * `params` must be a live handle, `w_max` and `since_loss` must point to
 * `flows` readable values each and `out` must be writable.
 */
enum FccStatus fcc_simulate(const struct FccParams *params,
                            enum FccAlgorithm alg,
                            enum FccLossModel loss_model,
                            const double *w_max,
                            const double *since_loss,
                            size_t flows,
                            double t_end,
                            double sample_interval,
                            uint64_t seed,
                            struct FccSimResult **out);

/**
 * # Safety
 * `res` must be a live handle and `len` writable.
 */
enum FccStatus fcc_sim_event_count(const struct FccSimResult *res, size_t *len);

/**
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum FccStatus fcc_sim_event(const struct FccSimResult *res, size_t index, struct FccEvent *out);

/**
 * Mean per-flow window over trace samples at or after `from`.
 *
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum FccStatus fcc_sim_mean_window_after(const struct FccSimResult *res, double from, double *out);

/**
 * # Safety
 * `res` must be null or a handle from `fcc_simulate` not yet freed.
 */
void fcc_sim_result_free(struct FccSimResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLUIDCC_H */
