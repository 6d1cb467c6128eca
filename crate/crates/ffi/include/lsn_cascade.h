#ifndef LSN_CASCADE_H
#define LSN_CASCADE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  LSN_NODE_KIND_SATELLITE = 0,
  LSN_NODE_KIND_USER_BEAM = 1,
  LSN_NODE_KIND_FEEDER_BEAM = 2,
  LSN_NODE_KIND_GATEWAY = 3,
  LSN_NODE_KIND_USER = 4,
} LsnNodeKind;

typedef enum {
  LSN_STATUS_OK = 0,
  LSN_STATUS_CONFIG = 1,
  LSN_STATUS_INPUT_DATA = 2,
  LSN_STATUS_INTEGRITY = 3,
  LSN_STATUS_NULL_ARGUMENT = 4,
  LSN_STATUS_OUT_OF_RANGE = 5,
  LSN_STATUS_PANIC = 6,
} LsnStatus;

typedef enum {
  LSN_TERMINATION_FIXED_POINT = 0,
  LSN_TERMINATION_DISCONNECTED = 1,
  LSN_TERMINATION_MAX_ITER = 2,
} LsnTermination;

typedef struct LsnRiskReport LsnRiskReport;

typedef struct LsnScenario LsnScenario;

typedef struct LsnSnapshot LsnSnapshot;

typedef struct LsnTimeseries LsnTimeseries;

/**
 * One row of a risk report. Undefined CFR and HBC values are NaN.
 */
typedef struct {
  size_t node;
  LsnNodeKind kind;
  size_t degree;
  double betweenness;
  double pagerank;
  double cfr;
  double hbc;
  size_t trial_count;
  bool black_swan;
} LsnNodeRisk;

typedef struct {
  size_t n_initial;
  size_t n_final;
  size_t iterations;
  double unserved_demand;
  LsnTermination termination;
} LsnCascadeSummary;

/**
 * Mean HBC values are NaN when no node of that kind has one.
 */
typedef struct {
  int64_t unix_ms;
  double gcr;
  double systemic_risk;
  double mean_hbc_satellite;
  double mean_hbc_gateway;
  double mean_hbc_feederbeam;
  double mean_hbc_userbeam;
} LsnTimeseriesPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *lsn_last_error(void);

const char *lsn_version(void);

/**
 * Builds a scenario from configuration text in `key = value` form. Empty text gives
 * the defaults.
 *
 * # Safety
 * `config_text` must be a NUL-terminated string and `out` a valid pointer.
 */
LsnStatus lsn_scenario_new(const char *config_text, LsnScenario **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
LsnStatus lsn_scenario_from_file(const char *path, LsnScenario **out);

/**
 * # Safety
 * `scenario` must come from `lsn_scenario_new` or be NULL.
 */
void lsn_scenario_free(LsnScenario *scenario);

/**
 * Number of sampled instants in the configured horizon; 0 for NULL.
 *
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
size_t lsn_scenario_time_count(const LsnScenario *scenario);

/**
 * Configured start time in Unix milliseconds; 0 for NULL.
 *
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
int64_t lsn_scenario_start_ms(const LsnScenario *scenario);

/**
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
LsnStatus lsn_snapshot_at(const LsnScenario *scenario, int64_t unix_ms, LsnSnapshot **out);

/**
 * # Safety
 * `snapshot` must come from `lsn_snapshot_at` or be NULL.
 */
void lsn_snapshot_free(LsnSnapshot *snapshot);

/**
 * # Safety
 * `snapshot` must be a live handle or NULL.
 */
size_t lsn_snapshot_node_count(const LsnSnapshot *snapshot);

/**
 * # Safety
 * `snapshot` must be a live handle or NULL.
 */
size_t lsn_snapshot_edge_count(const LsnSnapshot *snapshot);

/**
 * # Safety
 * `snapshot` must be a live handle and `out` a valid pointer.
 */
LsnStatus lsn_snapshot_node_kind(const LsnSnapshot *snapshot, size_t node, LsnNodeKind *out);

/**
 * Runs the single-node trials and assembles per-node risk metrics.
 *
 * # Safety
 * Handles must be live and `out` a valid pointer.
 */
LsnStatus lsn_risk_report(const LsnScenario *scenario,
                          const LsnSnapshot *snapshot,
                          LsnRiskReport **out);

/**
 * # Safety
 * `report` must come from `lsn_risk_report` or be NULL.
 */
void lsn_risk_report_free(LsnRiskReport *report);

/**
 * # Safety
 * `report` must be a live handle or NULL.
 */
size_t lsn_risk_report_len(const LsnRiskReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
LsnStatus lsn_risk_report_row(const LsnRiskReport *report, size_t index, LsnNodeRisk *out);

/**
 * Attacks `targets` with uniform compromise level 1 and severity `alpha`, under
 * traffic drawn with `traffic_seed`.
 *
 * # Safety
 * Handles must be live, `targets` must hold `n_targets` ids (may be NULL when zero)
 * and `out` must be a valid pointer.
 */
LsnStatus lsn_cascade_run(const LsnScenario *scenario,
                          const LsnSnapshot *snapshot,
                          const size_t *targets,
                          size_t n_targets,
                          double alpha,
                          uint64_t traffic_seed,
                          LsnCascadeSummary *out);

/**
 * Runs the configured timeseries.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
LsnStatus lsn_timeseries_run(const LsnScenario *scenario, LsnTimeseries **out);

/**
 * # Safety
 * `ts` must come from `lsn_timeseries_run` or be NULL.
 */
void lsn_timeseries_free(LsnTimeseries *ts);

/**
 * # Safety
 * `ts` must be a live handle or NULL.
 */
size_t lsn_timeseries_len(const LsnTimeseries *ts);

/**
 * # Safety
 * `ts` must be a live handle and `out` a valid pointer.
 */
LsnStatus lsn_timeseries_point(const LsnTimeseries *ts, size_t index, LsnTimeseriesPoint *out);

/**
 * Writes timeseries.csv, node_metrics.csv and top_nodes.csv into `dir`, creating it.
 *
 * # Safety
 * `ts` must be a live handle and `dir` a NUL-terminated string.
 */
LsnStatus lsn_timeseries_write(const LsnTimeseries *ts, const char *dir, size_t top_n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSN_CASCADE_H */
