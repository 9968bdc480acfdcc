#ifndef DELAYSWITCH_H
#define DELAYSWITCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DsBaselineVerdict {
  DS_BASELINE_VERDICT_STABLE = 0,
  DS_BASELINE_VERDICT_UNSTABLE = 1,
  DS_BASELINE_VERDICT_MARGINAL_CENTER = 2,
  DS_BASELINE_VERDICT_MARGINAL_ZERO_ROOT = 3,
} DsBaselineVerdict;

typedef enum DsDirection {
  DS_DIRECTION_DESTABILIZING = 0,
  DS_DIRECTION_STABILIZING = 1,
} DsDirection;

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_NON_GENERIC = 3,
  DS_STATUS_OUT_OF_RANGE = 4,
  DS_STATUS_FAILED = 5,
  DS_STATUS_PANIC = 6,
} DsStatus;

/**
 * Opaque switch report.
 */
typedef struct DsReport DsReport;

/**
 * Opaque delay system.
 */
typedef struct DsSystem DsSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ds_last_error(void);

/**
 * Build a system from 4 or 7 coefficients and a placement name.
 * `a13` is read only for the `mixed_self` placement.
 *
 * # Safety
 * `coeffs` must point to `len` doubles, `placement` to a NUL-terminated
 * string and `out` to writable storage for one pointer.
 */
enum DsStatus ds_system_new(const double *coeffs,
                            size_t len,
                            const char *placement,
                            double a13,
                            struct DsSystem **out);

/**
 * # Safety
 * `sys` must come from `ds_system_new` and not be freed twice.
 */
void ds_system_free(struct DsSystem *sys);

/**
 * Delay-free trace, determinant and verdict of a planar system.
 *
 * # Safety
 * Pointers must be valid; `sys` must come from `ds_system_new`.
 */
enum DsStatus ds_system_baseline(const struct DsSystem *sys,
                                 double *trace,
                                 double *determinant,
                                 enum DsBaselineVerdict *verdict);

/**
 * Stability switches on `[0, tau_max]`.
 *
 * # Safety
 * `sys` must come from `ds_system_new`; `out` must be writable.
 */
enum DsStatus ds_switch_report(const struct DsSystem *sys, double tau_max, struct DsReport **out);

/**
 * # Safety
 * `report` must come from `ds_switch_report` and not be freed twice.
 */
void ds_report_free(struct DsReport *report);

/**
 * Number of switches inside the report window; 0 for NULL.
 *
 * # Safety
 * `report` must be NULL or come from `ds_switch_report`.
 */
size_t ds_report_switch_count(const struct DsReport *report);

/**
 * Delay and direction of switch `index`.
 *
 * # Safety
 * `report` must come from `ds_switch_report`; output pointers must be writable.
 */
enum DsStatus ds_report_switch(const struct DsReport *report,
                               size_t index,
                               double *tau,
                               enum DsDirection *direction);

/**
 * The full report as a JSON string, released with `ds_string_free`.
 *
 * # Safety
 * `report` must come from `ds_switch_report`; `out` must be writable.
 */
enum DsStatus ds_report_to_json(const struct DsReport *report, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void ds_string_free(char *s);

/**
 * Right half-plane root count at `tau` from the argument-principle oracle.
 * `marginal` is set to 1 when a root lies on the imaginary axis.
 *
 * # Safety
 * `sys` must come from `ds_system_new`; output pointers must be writable.
 */
enum DsStatus ds_unstable_count(const struct DsSystem *sys,
                                double tau,
                                size_t *count,
                                int32_t *marginal);

/**
 * Growth rate of a simulated trajectory from the all-ones history with the
 * default step and horizon.
 *
 * # Safety
 * `sys` must come from `ds_system_new`; `rate` must be writable.
 */
enum DsStatus ds_growth_rate(const struct DsSystem *sys, double tau, double *rate);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DELAYSWITCH_H */
