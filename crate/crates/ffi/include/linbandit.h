#ifndef LINBANDIT_H
#define LINBANDIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LbStatus {
  LB_STATUS_OK = 0,
  LB_STATUS_NULL_ARGUMENT = 1,
  LB_STATUS_INVALID_UTF8 = 2,
  LB_STATUS_INVALID_PARAMETER = 3,
  LB_STATUS_HYPOTHESIS = 4,
  LB_STATUS_INCOMPATIBLE = 5,
  LB_STATUS_INPUT_DATA = 6,
  LB_STATUS_NUMERICAL = 7,
  LB_STATUS_BUFFER_TOO_SMALL = 8,
  LB_STATUS_PANIC = 9,
} LbStatus;

// Per-step series exposed by [`lb_summary_copy`].
typedef enum LbSeries {
  LB_SERIES_MEAN_REWARD = 0,
  LB_SERIES_SE_REWARD = 1,
  LB_SERIES_MEAN_RISK = 2,
  LB_SERIES_SE_RISK = 3,
  LB_SERIES_MEAN_TRACE = 4,
  LB_SERIES_MEAN_THETAHAT_NORM = 5,
  LB_SERIES_MEAN_THETAHAT_NORM_SQ = 6,
} LbSeries;

// Opaque experiment configuration.
typedef struct LbConfig LbConfig;

// Opaque averaged trajectories.
typedef struct LbSummary LbSummary;

// Constants of the reward and risk bounds.
typedef struct LbBoundConstants {
  double c1;
  double c2;
  double c3;
  double c4;
  double alpha;
  double c_gamma_delta;
  double omega;
} LbBoundConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t lb_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *lb_version(void);

// Creates a unit-ball configuration. `policy` is one of `ball-explore`,
// `smooth-explore`, `neighborhood`, `phased`, `greedy`, `oracle`.
//
// # Safety
// `policy` must be a NUL-terminated string; `out` must be writable.
enum LbStatus lb_config_new(size_t p,
                            double delta,
                            size_t horizon,
                            size_t reps,
                            const char *policy,
                            uint64_t seed,
                            struct LbConfig **out);

// # Safety
// `config` must come from [`lb_config_new`] and not be used afterwards.
void lb_config_free(struct LbConfig *config);

// Sets the arm set from `ball`, `cloud:M` or `catalog:PATH`.
//
// # Safety
// `config` must be a live handle and `spec` a NUL-terminated string.
enum LbStatus lb_config_set_arm_set(struct LbConfig *config, const char *spec);

// Sets the feedback model from `gaussian` or `quant:A`.
//
// # Safety
// `config` must be a live handle and `spec` a NUL-terminated string.
enum LbStatus lb_config_set_feedback(struct LbConfig *config, const char *spec);

// Enables or disables the theorem hypothesis checks.
//
// # Safety
// `config` must be a live handle.
enum LbStatus lb_config_set_check_bounds(struct LbConfig *config, bool enabled);

// Worker threads; 0 uses all cores. Results do not depend on it.
//
// # Safety
// `config` must be a live handle.
enum LbStatus lb_config_set_workers(struct LbConfig *config, size_t workers);

// Runs the experiment described by `config`.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum LbStatus lb_run(const struct LbConfig *config, struct LbSummary **out);

// # Safety
// `summary` must come from [`lb_run`] and not be used afterwards.
void lb_summary_free(struct LbSummary *summary);

// Number of steps in each series, or 0 for a null handle.
//
// # Safety
// `summary` must be null or a live handle.
size_t lb_summary_horizon(const struct LbSummary *summary);

// Mean over realizations of the best achievable per-step reward.
//
// # Safety
// `summary` must be a live handle; `out` must be writable.
enum LbStatus lb_summary_r_opt(const struct LbSummary *summary, double *out);

// Copies one series (entry `t - 1` holds step `t`) into `buf`, which must
// hold at least [`lb_summary_horizon`] values.
//
// # Safety
// `summary` must be a live handle; `buf` must point to `len` writable doubles.
enum LbStatus lb_summary_copy(const struct LbSummary *summary,
                              enum LbSeries series,
                              double *buf,
                              size_t len);

// Evaluates the bound constants for `(p, Δ, κ, γ)`.
//
// # Safety
// `out` must be writable.
enum LbStatus lb_bound_constants(size_t p,
                                 double delta,
                                 double kappa,
                                 double gamma,
                                 struct LbBoundConstants *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINBANDIT_H */
