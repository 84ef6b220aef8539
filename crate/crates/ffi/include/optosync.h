#ifndef OPTOSYNC_H
#define OPTOSYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum OptosyncStatus {
  OPTOSYNC_STATUS_OK = 0,
  OPTOSYNC_STATUS_NULL_POINTER = 1,
  OPTOSYNC_STATUS_INVALID_PARAM = 2,
  OPTOSYNC_STATUS_NON_FINITE = 3,
  OPTOSYNC_STATUS_DEGENERATE_PHASE = 4,
  OPTOSYNC_STATUS_NON_POSITIVE_DENOMINATOR = 5,
  OPTOSYNC_STATUS_EMPTY_WINDOW = 6,
  OPTOSYNC_STATUS_TOO_SHORT = 7,
  OPTOSYNC_STATUS_OUT_OF_RANGE = 8,
  OPTOSYNC_STATUS_INTERNAL = 99,
} OptosyncStatus;

// Opaque trajectory handle.
typedef struct OptosyncTrajectory OptosyncTrajectory;

// Model parameters; field meanings follow the config keys of the CLI.
typedef struct OptosyncParams {
  double delta1;
  double delta2;
  double omega1;
  double omega2;
  double g;
  double gamma;
  double kappa;
  double drive;
  double lambda;
  double mod_amp;
  double mod_freq;
  double n_bath;
} OptosyncParams;

// Steady-window summary of a trajectory.
typedef struct OptosyncSummary {
  bool steady_reached;
  double onset_time;
  double period_used;
  double window_start;
  double window_end;
  // Phase difference φ₂ − φ₁ in [0, 2π).
  double phi;
  double s_q;
  double s_phi;
  double s_p;
  double s_anti;
  double s_c;
  double max_real_eig;
  bool all_negative;
} OptosyncSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL after a
// successful one. Valid until the next call into this library.
const char *optosync_last_error(void);

// Library version as a static NUL-terminated string.
const char *optosync_version(void);

// Baseline parameters (λ=0.03, A_c=2, ω_c=3).
struct OptosyncParams optosync_default_params(void);

// # Safety
// `params` must point to a valid `OptosyncParams`.
enum OptosyncStatus optosync_params_validate(const struct OptosyncParams *params);

// Integrate from the zero mean and vacuum covariance to `t_end`, recording
// every `record_stride` steps. `dt <= 0` selects the default step.
//
// # Safety
// `params` must be valid; `out` must be writable. On success `*out` owns a
// handle to free with [`optosync_trajectory_free`].
enum OptosyncStatus optosync_simulate(const struct OptosyncParams *params,
                                      double t_end,
                                      double dt,
                                      size_t record_stride,
                                      struct OptosyncTrajectory **out);

// # Safety
// `traj` must be NULL or a handle from [`optosync_simulate`] not yet freed.
void optosync_trajectory_free(struct OptosyncTrajectory *traj);

// Number of recorded samples; 0 for NULL.
//
// # Safety
// `traj` must be NULL or a live handle.
size_t optosync_trajectory_len(const struct OptosyncTrajectory *traj);

// Copy sample `index`: its time, the 8 mean components and the 64
// covariance entries. Any of `t`, `mean`, `cov` may be NULL to skip it.
//
// # Safety
// `traj` must be a live handle; non-NULL outputs must hold 1, 8 and 64
// doubles respectively.
enum OptosyncStatus optosync_trajectory_sample(const struct OptosyncTrajectory *traj,
                                               size_t index,
                                               double *t,
                                               double *mean,
                                               double *cov);

// Steady-state detection, window averages and stability of a trajectory.
// `transient_fraction` outside [0, 1) selects the default (0.6).
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum OptosyncStatus optosync_trajectory_analyze(const struct OptosyncTrajectory *traj,
                                                double transient_fraction,
                                                struct OptosyncSummary *out);

// Complete synchronization of a covariance matrix.
//
// # Safety
// `cov` must hold 64 doubles; `out` must be writable.
enum OptosyncStatus optosync_s_q(const double *cov, double *out);

// φ-synchronization at phase difference `phi`.
//
// # Safety
// As [`optosync_s_q`].
enum OptosyncStatus optosync_s_phi(const double *cov, double phi, double *out);

// Phase synchronization with per-oscillator phases `phi1`, `phi2`.
//
// # Safety
// As [`optosync_s_q`].
enum OptosyncStatus optosync_s_p(const double *cov, double phi1, double phi2, double *out);

// Anti-synchronization.
//
// # Safety
// As [`optosync_s_q`].
enum OptosyncStatus optosync_s_anti(const double *cov, double *out);

// Drift matrix at mean state `mean` (8 doubles) and time `t`.
//
// # Safety
// `params` valid, `mean` holds 8 doubles, `out` holds 64.
enum OptosyncStatus optosync_drift_matrix(const struct OptosyncParams *params,
                                          const double *mean,
                                          double t,
                                          double *out);

// Diffusion matrix of the fluctuation dynamics.
//
// # Safety
// `params` valid, `out` holds 64 doubles.
enum OptosyncStatus optosync_noise_matrix(const struct OptosyncParams *params, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPTOSYNC_H */
