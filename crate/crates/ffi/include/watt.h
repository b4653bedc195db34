/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef WATT_H
#define WATT_H

#include <stddef.h>
#include <stdint.h>

// Result codes. The first four match the `watt` CLI exit codes.
typedef enum WattStatus {
  WATT_STATUS_OK = 0,
  // Invalid argument value.
  WATT_STATUS_USAGE = 1,
  // Malformed input data or model file.
  WATT_STATUS_DATA = 2,
  // The regression could not be solved (rank-deficient design).
  WATT_STATUS_NUMERICAL = 3,
  WATT_STATUS_NULL_POINTER = 4,
  // A string argument was not valid UTF-8.
  WATT_STATUS_UTF8 = 5,
  // A panic was caught at the boundary. This is a bug.
  WATT_STATUS_PANIC = 6,
} WattStatus;

// Opaque trained power model.
typedef struct WattModel WattModel;

typedef struct WattCoefficients {
  double alpha;
  double beta_cpu;
  double beta_mem;
  double beta_disk;
  double beta_net;
} WattCoefficients;

typedef struct WattEvaluation {
  double mape;
  double accuracy;
  double max_abs_error_w;
  size_t n;
} WattEvaluation;

typedef struct WattEnergyReport {
  double kwh;
  double duration_s;
  double mean_power_w;
  double kwh_per_day;
} WattEnergyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or NULL if the last
// call succeeded. The pointer stays valid until the next library call on the
// same thread; do not free it.
const char *watt_last_error_message(void);

// Parses a model JSON document into a new handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out_model` must be writable.
enum WattStatus watt_model_load_json(const char *json, struct WattModel **out_model);

// Serializes a model to JSON. Release the string with [`watt_string_free`].
//
// # Safety
// `model` must be a live handle; `out_json` must be writable.
enum WattStatus watt_model_save_json(const struct WattModel *model, char **out_json);

// Frees a string returned by the library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void watt_string_free(char *s);

// Frees a model handle. NULL is ignored.
//
// # Safety
// `model` must come from this library and not have been freed already.
void watt_model_free(struct WattModel *model);

// Predicted power in watts for one sample. Not clamped.
//
// # Safety
// `model` must be a live handle; `out_watts` must be writable.
enum WattStatus watt_model_predict(const struct WattModel *model,
                                   double cpu,
                                   double mem,
                                   double disk,
                                   double net,
                                   double *out_watts);

// # Safety
// `model` must be a live handle; `out` must be writable.
enum WattStatus watt_model_coefficients(const struct WattModel *model,
                                        struct WattCoefficients *out);

// Aligns the two CSV traces and fits a model. A `tolerance_s` of zero or
// less uses half the median metric interval. `hardware_id` may be NULL.
//
// # Safety
// String arguments must be NUL-terminated; `out_model` must be writable.
enum WattStatus watt_train_csv(const char *metrics_csv,
                               const char *power_csv,
                               double tolerance_s,
                               const char *hardware_id,
                               struct WattModel **out_model);

// Scores a model against measured power. Tolerance as in [`watt_train_csv`].
//
// # Safety
// `model` must be a live handle, strings NUL-terminated, `out` writable.
enum WattStatus watt_evaluate_csv(const struct WattModel *model,
                                  const char *metrics_csv,
                                  const char *power_csv,
                                  double tolerance_s,
                                  struct WattEvaluation *out);

// Trapezoidal energy of a power series. Timestamps must strictly increase.
//
// # Safety
// Both arrays must hold `len` values; `out` must be writable.
enum WattStatus watt_energy_integrate(const double *timestamps,
                                      const double *power_w,
                                      size_t len,
                                      struct WattEnergyReport *out);

// Total electricity cost over `months` for constant daily consumption, with
// the rate growing by `escalation_per_year` each full year.
//
// # Safety
// `out_total` must be writable.
enum WattStatus watt_project_cost(double kwh_per_day,
                                  double rate_per_kwh,
                                  double escalation_per_year,
                                  uint32_t months,
                                  double *out_total);

// Two-sided Student-t tail probability `P(|T| >= |t|)`. `df` must be >= 1.
//
// # Safety
// `out_p` must be writable.
enum WattStatus watt_student_t_sf(double t, double df, double *out_p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WATT_H */
