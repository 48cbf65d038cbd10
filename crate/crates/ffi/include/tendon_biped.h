#ifndef TENDON_BIPED_H
#define TENDON_BIPED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum TbStatus {
  TB_STATUS_OK = 0,
  TB_STATUS_NULL_POINTER = 1,
  TB_STATUS_INVALID_ARGUMENT = 2,
  TB_STATUS_PARSE = 3,
  TB_STATUS_VALIDATION = 4,
  TB_STATUS_IO = 5,
  TB_STATUS_SIMULATION_FAULT = 6,
  TB_STATUS_ANALYSIS = 7,
  TB_STATUS_PANIC = 8,
} TbStatus;

/**
 * Validated robot, tendon, controller and simulation settings.
 */
typedef struct TbConfig TbConfig;

/**
 * Analysis of a trial.
 */
typedef struct TbReport TbReport;

/**
 * A finished (or fallen) trial with its log.
 */
typedef struct TbTrial TbTrial;

/**
 * Scalar gait metrics. Peaks in W, timings in % of the gait cycle, angles in
 * degrees. `amplification` is NaN when `has_amplification` is 0.
 */
typedef struct TbMetrics {
  size_t cycles;
  double cycle_duration;
  double speed;
  double stride_length;
  int has_amplification;
  double amplification;
  double positive_peak_power;
  double negative_peak_power;
  double positive_peak_timing;
  double negative_peak_timing;
  double mean_positive_power;
  double total_cot;
  double net_cot;
  double toe_off_timing;
} TbMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tb_version(void);

/**
 * Configuration for a named preset: "GAS+SOL", "SOL" or "GAS".
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum TbStatus tb_config_from_preset(const char *name, struct TbConfig **out);

/**
 * Configuration parsed from the text of a TOML configuration file.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum TbStatus tb_config_from_toml(const char *toml, struct TbConfig **out);

/**
 * Override the trial length and the settling time excluded from analysis, s.
 *
 * # Safety
 * `config` must come from a `tb_config_*` constructor.
 */
enum TbStatus tb_config_set_duration(struct TbConfig *config, double duration, double settle_time);

/**
 * # Safety
 * `config` must be NULL or come from a `tb_config_*` constructor, and must
 * not be used afterwards.
 */
void tb_config_free(struct TbConfig *config);

/**
 * Simulate a trial. A fall still yields a trial handle so its partial log
 * can be saved; check it with `tb_trial_fallen`.
 *
 * # Safety
 * `config` must be a live configuration handle and `out` a writable pointer.
 */
enum TbStatus tb_trial_run(const struct TbConfig *config, struct TbTrial **out);

/**
 * 1 when the robot fell or the integration faulted, 0 otherwise, -1 for NULL.
 *
 * # Safety
 * `trial` must be NULL or a live trial handle.
 */
int tb_trial_fallen(const struct TbTrial *trial);

/**
 * Number of logged control steps, 0 for NULL.
 *
 * # Safety
 * `trial` must be NULL or a live trial handle.
 */
size_t tb_trial_rows(const struct TbTrial *trial);

/**
 * Write `<dir>/<stem>.csv` and its metadata sidecar.
 *
 * # Safety
 * `trial` must be a live trial handle; `dir` and `stem` NUL-terminated strings.
 */
enum TbStatus tb_trial_save(const struct TbTrial *trial, const char *dir, const char *stem);

/**
 * Analyze the left leg of a completed trial with default options.
 *
 * # Safety
 * `trial` must be a live trial handle and `out` a writable pointer.
 */
enum TbStatus tb_trial_analyze(const struct TbTrial *trial, struct TbReport **out);

/**
 * # Safety
 * `trial` must be NULL or a live trial handle, and must not be used afterwards.
 */
void tb_trial_free(struct TbTrial *trial);

/**
 * Copy the scalar metrics of a report.
 *
 * # Safety
 * `report` must be a live report handle and `out` a writable pointer.
 */
enum TbStatus tb_report_metrics(const struct TbReport *report, struct TbMetrics *out);

/**
 * Write curves.csv, coordination.csv and metrics.json into `dir`.
 *
 * # Safety
 * `report` must be a live report handle and `dir` a NUL-terminated string.
 */
enum TbStatus tb_report_save(const struct TbReport *report, const char *dir);

/**
 * # Safety
 * `report` must be NULL or a live report handle, and must not be used afterwards.
 */
void tb_report_free(struct TbReport *report);

/**
 * Total and net cost of transport from mean positive power (W), mass (kg),
 * speed (m/s) and standby power (W).
 *
 * # Safety
 * `total` and `net` must be writable pointers.
 */
enum TbStatus tb_cost_of_transport(double power,
                                   double mass,
                                   double speed,
                                   double standby,
                                   double *total,
                                   double *net);

/**
 * Froude-scaled test speed for a leg length in m.
 *
 * # Safety
 * `speed` must be a writable pointer.
 */
enum TbStatus tb_froude_test_speed(double leg_length, double *speed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TENDON_BIPED_H */
