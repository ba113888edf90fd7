#ifndef WCASCADE_H
#define WCASCADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status code returned by every fallible function.
typedef enum WcStatus {
  WC_STATUS_OK = 0,
  WC_STATUS_NULL_POINTER = 1,
  WC_STATUS_INVALID_ARGUMENT = 2,
  WC_STATUS_NUMERICAL = 3,
  WC_STATUS_BUFFER_TOO_SMALL = 4,
  WC_STATUS_PANIC = 5,
} WcStatus;

// Opaque single-excitation state.
typedef struct WcState WcState;

typedef struct WcFeasibility {
  double t_pass;
  double order_time;
  uint32_t rounds;
  double total_time;
  double decay_probability_per_atom;
  uint32_t max_rounds;
  // May exceed every integer type; kept as a double.
  double max_size;
  double process_time;
  uint32_t process_max_rounds;
  double process_max_size;
} WcFeasibility;

typedef struct WcApproximation {
  double infidelity;
  double photon_leakage;
  double delta_over_g;
  double top_rung_population;
} WcApproximation;

typedef struct WcFidelityEstimate {
  double mean;
  double std_error;
  size_t trials;
  size_t decayed;
  size_t reduction_failures;
  double survival_fraction;
} WcFidelityEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread; empty after a successful call. Valid
// until the next call into this library on the same thread.
const char *wc_last_error_message(void);

// Builds a state from `n` interleaved (re, im) pairs; must be normalized.
//
// # Safety
// `re_im` must point to `2 * n` doubles; `out` must be writable.
enum WcStatus wc_state_new(const double *re_im, size_t n, struct WcState **out);

// # Safety
// `out` must be writable.
enum WcStatus wc_canonical_w(size_t n, struct WcState **out);

// `2^rounds` atoms after `rounds` doubling passes from one excited atom.
//
// # Safety
// `out` must be writable.
enum WcStatus wc_cascade(uint32_t rounds, struct WcState **out);

// Runs the full protocol to `target_n` atoms. Targets that are not powers of
// two consume `seed` for the measurement reduction; `succeeded` reports
// whether it left a `target_n`-atom state.
//
// # Safety
// `out` and `succeeded` must be writable.
enum WcStatus wc_run(double g_hz,
                     double delta_over_g,
                     size_t target_n,
                     uint64_t seed,
                     struct WcState **out,
                     bool *succeeded);

// One doubling round applied to `state`, with fresh ancillas.
//
// # Safety
// `state` must be a live handle; `out` must be writable.
enum WcStatus wc_state_expand_double(const struct WcState *state, struct WcState **out);

// Measures ancillas of `state` until `target_n` remain.
//
// # Safety
// `state` must be a live handle; `out` and `succeeded` must be writable.
enum WcStatus wc_state_reduce(const struct WcState *state,
                              size_t target_n,
                              uint64_t seed,
                              struct WcState **out,
                              bool *succeeded);

// # Safety
// `state` must be a live handle; `len` must be writable.
enum WcStatus wc_state_len(const struct WcState *state, size_t *len);

// Copies amplitudes as interleaved (re, im) pairs. `capacity` counts
// amplitudes, not doubles.
//
// # Safety
// `state` must be a live handle; `re_im` must hold `2 * capacity` doubles.
enum WcStatus wc_state_amplitudes(const struct WcState *state, double *re_im, size_t capacity);

// # Safety
// `state` must be a live handle; `value` must be writable.
enum WcStatus wc_state_w_class_fidelity(const struct WcState *state, double *value);

// # Safety
// `a` and `b` must be live handles; `value` must be writable.
enum WcStatus wc_state_fidelity(const struct WcState *a, const struct WcState *b, double *value);

// Releases a handle. Null is ignored.
//
// # Safety
// `state` must come from this library and not be used afterwards.
void wc_state_free(struct WcState *state);

// # Safety
// `report` must be writable.
enum WcStatus wc_feasibility(double g_hz,
                             double delta_over_g,
                             size_t target_n,
                             double t_r,
                             struct WcFeasibility *report);

// Compares one quarter pass of the effective model against the exact
// atom-cavity evolution truncated at `n_max` photons.
//
// # Safety
// `report` must be writable.
enum WcStatus wc_compare_effective_exact(double g_hz,
                                         double delta_over_g,
                                         size_t n_max,
                                         struct WcApproximation *report);

// Monte-Carlo fidelity of the protocol to `target_n` under angle jitter and,
// when `decay` is set, radiative decay with lifetime `t_r`.
//
// # Safety
// `estimate` must be writable.
enum WcStatus wc_estimate_fidelity(double g_hz,
                                   double delta_over_g,
                                   size_t target_n,
                                   double theta_sigma,
                                   double t_r,
                                   bool decay,
                                   size_t trials,
                                   uint64_t seed,
                                   struct WcFidelityEstimate *estimate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WCASCADE_H */
