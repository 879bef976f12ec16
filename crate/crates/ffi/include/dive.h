#ifndef DIVE_H
#define DIVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DiveStatus {
  DIVE_STATUS_OK = 0,
  DIVE_STATUS_NULL_POINTER = 1,
  DIVE_STATUS_INVALID_ARGUMENT = 2,
  DIVE_STATUS_INFEASIBLE = 3,
  DIVE_STATUS_NUMERICAL = 4,
  DIVE_STATUS_PANIC = 5,
} DiveStatus;

// Opaque plan.
typedef struct DivePlanHandle DivePlanHandle;

// Body and rotor parameters in SI units.
typedef struct DiveBody {
  double i1;
  double i2;
  double i3;
  double l;
  double omega_d;
  double i_d;
} DiveBody;

// Solved quantities of a plan. Unsolved values are NaN.
typedef struct DivePlanSummary {
  bool feasible;
  // 0 symmetric, 1 general.
  uint8_t planner;
  double s;
  double s_minus;
  double rho;
  double h;
  double l;
  // Physical stage durations in seconds.
  double durations[5];
  double phi[5];
  double psi[5];
  int8_t terminal_sign;
} DivePlanSummary;

typedef struct DiveClosure {
  double phi_total;
  double psi_total;
  double phi_error;
  double psi_error;
  double max_energy_drift;
  double max_norm_drift;
  double theta_final;
  int8_t terminal_sign;
} DiveClosure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *dive_last_error(void);

// Plans a dive with `body.l` given; the rotor is solved for. An infeasible
// request still yields a handle with `feasible = false`.
//
// # Safety
// `body` must point to a valid [`DiveBody`] and `out` to writable storage.
enum DiveStatus dive_plan_new(const struct DiveBody *body,
                              double m,
                              double n,
                              double t_tot,
                              struct DivePlanHandle **out);

// Plans with the rotor momentum `omega_d · i_d` fixed and solves for l;
// `body.l` is ignored.
//
// # Safety
// As for [`dive_plan_new`].
enum DiveStatus dive_plan_for_rotor(const struct DiveBody *body,
                                    double m,
                                    double n,
                                    double t_tot,
                                    struct DivePlanHandle **out);

// # Safety
// `handle` must come from this library and not have been freed. Null is
// accepted and ignored.
void dive_plan_free(struct DivePlanHandle *handle);

// # Safety
// `handle` must be a live plan handle and `out` writable.
enum DiveStatus dive_plan_summary(const struct DivePlanHandle *handle, struct DivePlanSummary *out);

// Serialises the plan as a JSON document. Release the string with
// [`dive_string_free`].
//
// # Safety
// `handle` must be a live plan handle and `out` writable.
enum DiveStatus dive_plan_to_json(const struct DivePlanHandle *handle, char **out);

// # Safety
// `json` must be a nul-terminated string and `out` writable.
enum DiveStatus dive_plan_from_json(const char *json, struct DivePlanHandle **out);

// # Safety
// `s` must come from this library (or be null).
void dive_string_free(char *s);

// Replays a feasible plan through the five stages. `rtol` ≤ 0 selects the
// default integrator tolerance.
//
// # Safety
// `handle` must be a live plan handle and `out` writable.
enum DiveStatus dive_simulate(const struct DivePlanHandle *handle,
                              double rtol,
                              struct DiveClosure *out);

// Complete elliptic integral of the first kind, parameter m = k².
//
// # Safety
// `out` must be writable.
enum DiveStatus dive_ellip_k(double m, double *out);

// Complete elliptic integral of the second kind, parameter m = k².
//
// # Safety
// `out` must be writable.
enum DiveStatus dive_ellip_e(double m, double *out);

// Complete elliptic integral of the third kind Π(n, m).
//
// # Safety
// `out` must be writable.
enum DiveStatus dive_ellip_pi(double n, double m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIVE_H */
