/* C interface to the heavytail library. */

#ifndef HEAVYTAIL_H
#define HEAVYTAIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HtEstimatorKind {
  HT_ESTIMATOR_KIND_EMPIRICAL = 0,
  HT_ESTIMATOR_KIND_TRUNCATED = 1,
  HT_ESTIMATOR_KIND_MEDIAN_OF_MEANS = 2,
  HT_ESTIMATOR_KIND_CATONI = 3,
} HtEstimatorKind;

typedef enum HtPolicyVariant {
  HT_POLICY_VARIANT_ROBUST_UCB = 0,
  HT_POLICY_VARIANT_MODIFIED_ROBUST_UCB = 1,
  HT_POLICY_VARIANT_BASELINE_UCB = 2,
} HtPolicyVariant;

/**
 * Outcome of a call. Anything but `Ok` leaves a message for
 * [`ht_last_error_message`].
 */
typedef enum HtStatus {
  HT_STATUS_OK = 0,
  HT_STATUS_NULL_POINTER = 1,
  HT_STATUS_INVALID_UTF8 = 2,
  HT_STATUS_INVALID_INPUT = 3,
  HT_STATUS_PRECONDITION_VIOLATED = 4,
  HT_STATUS_VALIDATION_FAILED = 5,
  HT_STATUS_IO_FAILED = 6,
  HT_STATUS_JSON_FAILED = 7,
  HT_STATUS_PANICKED = 8,
} HtStatus;

/**
 * A bandit policy with its per-arm observation state. Create with
 * [`ht_policy_new`], destroy with [`ht_policy_free`].
 */
typedef struct HtPolicy HtPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failing call on this thread; empty string if
 * nothing failed yet. The pointer stays valid until the next failing call
 * on the same thread.
 */
const char *ht_last_error_message(void);

/**
 * Library version as a static string; do not free.
 */
const char *ht_version(void);

/**
 * Create a policy.
 *
 * `raw_bound_u` and `central_bound_v` are optional moment bounds; pass
 * null to leave one undeclared. Which bounds are required depends on the
 * estimator, and variant/estimator pairings are checked here.
 *
 * # Safety
 * `out` must point to writable storage for one pointer; the optional
 * bound pointers must be null or point to readable doubles.
 */
enum HtStatus ht_policy_new(enum HtPolicyVariant variant,
                            enum HtEstimatorKind kind,
                            double epsilon,
                            const double *raw_bound_u,
                            const double *central_bound_v,
                            size_t num_arms,
                            struct HtPolicy **out);

/**
 * Destroy a policy created by [`ht_policy_new`]. Null is a no-op.
 *
 * # Safety
 * `policy` must be a pointer from [`ht_policy_new`] that has not been
 * freed already.
 */
void ht_policy_free(struct HtPolicy *policy);

/**
 * Choose the arm to play in round `t` (1-based).
 *
 * # Safety
 * `policy` must be a live handle; `out_arm` must point to writable
 * storage.
 */
enum HtStatus ht_policy_select_arm(struct HtPolicy *policy, uint64_t t, size_t *out_arm);

/**
 * Record the reward observed for one pull of `arm`.
 *
 * # Safety
 * `policy` must be a live handle.
 */
enum HtStatus ht_policy_update(struct HtPolicy *policy, size_t arm, double reward);

/**
 * Evaluate one arm's index at round `t`. An arm that must be played
 * (never pulled, or held by the Catoni gate) reports
 * `*out_finite = false` and an unspecified value.
 *
 * # Safety
 * `policy` must be a live handle; `out_finite` and `out_value` must point
 * to writable storage.
 */
enum HtStatus ht_policy_index(struct HtPolicy *policy,
                              size_t arm,
                              uint64_t t,
                              bool *out_finite,
                              double *out_value);

/**
 * Number of recorded pulls of `arm`.
 *
 * # Safety
 * `policy` must be a live handle; `out` must point to writable storage.
 */
enum HtStatus ht_policy_pull_count(const struct HtPolicy *policy, size_t arm, uint64_t *out);

/**
 * Number of update calls so far.
 *
 * # Safety
 * `policy` must be a live handle; `out` must point to writable storage.
 */
enum HtStatus ht_policy_rounds(const struct HtPolicy *policy, uint64_t *out);

/**
 * One-shot robust mean estimate of `values[0..len]` at confidence `delta`.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must point to
 * writable storage; the optional bound pointers must be null or point to
 * readable doubles.
 */
enum HtStatus ht_estimate(enum HtEstimatorKind kind,
                          double epsilon,
                          const double *raw_bound_u,
                          const double *central_bound_v,
                          const double *values,
                          size_t len,
                          double delta,
                          double *out);

/**
 * Deviation radius of the estimator after `n` observations at confidence
 * `delta`.
 *
 * # Safety
 * `out` must point to writable storage; the optional bound pointers must
 * be null or point to readable doubles.
 */
enum HtStatus ht_confidence_radius(enum HtEstimatorKind kind,
                                   double epsilon,
                                   const double *raw_bound_u,
                                   const double *central_bound_v,
                                   uint64_t n,
                                   double delta,
                                   double *out);

/**
 * Evaluate a closed-form bound by name on JSON parameters; the names and
 * parameter shapes match the CLI's `bounds` subcommand.
 *
 * # Safety
 * `which` and `params_json` must be NUL-terminated strings; `out` must
 * point to writable storage.
 */
enum HtStatus ht_bound_eval(const char *which, const char *params_json, double *out);

/**
 * Run a full experiment from a JSON config (the same schema the CLI
 * loads) and hand back the trace as a JSON string. `workers` = 0 uses the
 * environment default. The string must be released with
 * [`ht_string_free`]. No files are written.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out_trace_json` must
 * point to writable storage for one pointer.
 */
enum HtStatus ht_run_experiment_json(const char *config_json,
                                     size_t workers,
                                     char **out_trace_json);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be a pointer previously returned by a heavytail function that
 * allocates, and must not be used afterwards.
 */
void ht_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEAVYTAIL_H */
