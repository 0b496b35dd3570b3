#ifndef RISKFOLD_H
#define RISKFOLD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_PARSE = 1,
  RF_STATUS_DOMAIN = 2,
  RF_STATUS_USAGE = 3,
  RF_STATUS_CONTRACT = 4,
  RF_STATUS_CONFLICT = 5,
  RF_STATUS_CONVERGENCE = 6,
  RF_STATUS_IO = 7,
  RF_STATUS_NULL_POINTER = 8,
  RF_STATUS_INVALID_UTF8 = 9,
  RF_STATUS_PANIC = 10,
} RfStatus;

// A decomposable model fitted to a table.
typedef struct RfModel RfModel;

// Per-record risk of the sample uniques of a table.
typedef struct RfRiskReport RfRiskReport;

// A microdata sample together with its schema.
typedef struct RfTable RfTable;

// Summary statistics of a fitted model.
typedef struct RfModelStats {
  double loglik;
  double aic;
  int64_t df_raw;
  int64_t df;
  size_t clique_count;
  size_t edge_count;
} RfModelStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next call.
const char *rf_last_error(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library and not yet freed.
void rf_string_free(char *s);

// Parses a schema (TOML text) and comma-separated records.
//
// # Safety
// String arguments must be nul-terminated; `out` must be writable.
enum RfStatus rf_table_from_csv(const char *schema_toml,
                                const char *csv,
                                bool has_header,
                                struct RfTable **out);

// # Safety
// `table` must be null or a live handle.
void rf_table_free(struct RfTable *table);

// Number of records, or 0 for a null handle.
//
// # Safety
// `table` must be null or a live handle.
size_t rf_table_len(const struct RfTable *table);

// Number of variables, or 0 for a null handle.
//
// # Safety
// `table` must be null or a live handle.
size_t rf_table_variables(const struct RfTable *table);

// Records as CSV text in their original codes; free with [`rf_string_free`].
//
// # Safety
// `table` must be a live handle; `out` must be writable.
enum RfStatus rf_table_to_csv(const struct RfTable *table, char **out);

// Multi-start hill climbing; returns the model with the smallest AIC.
//
// # Safety
// `table` must be a live handle; `out` must be writable.
enum RfStatus rf_model_search(const struct RfTable *table,
                              size_t restarts,
                              uint64_t seed,
                              double coin_prob,
                              struct RfModel **out);

// Fits the model of a chordal graph given as `edge_count` 1-based vertex pairs
// (`edges[2k]`, `edges[2k+1]`).
//
// # Safety
// `edges` must point to `2 * edge_count` values (may be null when `edge_count` is 0).
enum RfStatus rf_model_fit_edges(const struct RfTable *table,
                                 const size_t *edges,
                                 size_t edge_count,
                                 struct RfModel **out);

// # Safety
// `model` must be null or a live handle.
void rf_model_free(struct RfModel *model);

// # Safety
// `model` must be a live handle; `out` must be writable.
enum RfStatus rf_model_stats(const struct RfModel *model, struct RfModelStats *out);

// Estimated probability of one cell, given as `len` 0-based category indices.
//
// # Safety
// `cell` must point to `len` values; `out` must be writable.
enum RfStatus rf_model_mle_cell(const struct RfModel *model,
                                const uint32_t *cell,
                                size_t len,
                                double *out);

// The model as the JSON model file written by the command-line tool.
//
// # Safety
// Handles must be live; `out` must be writable.
enum RfStatus rf_model_to_json(const struct RfModel *model,
                               const struct RfTable *table,
                               char **out);

// Scores every sample unique of `table` under `model`.
//
// # Safety
// Handles must be live and `model` fitted on `table`; `out` must be writable.
enum RfStatus rf_risk_estimate(const struct RfTable *table,
                               const struct RfModel *model,
                               struct RfRiskReport **out);

// # Safety
// `report` must be null or a live handle.
void rf_risk_report_free(struct RfRiskReport *report);

// Estimated number of population uniques among the sample uniques (NaN for a null handle).
//
// # Safety
// `report` must be null or a live handle.
double rf_risk_estimate_total(const struct RfRiskReport *report);

// Number of sample uniques scored by the report.
//
// # Safety
// `report` must be null or a live handle.
size_t rf_risk_sample_uniques(const struct RfRiskReport *report);

// Counts of sample uniques per band: `above 1e-2`, eight decades down to `1e-10`,
// then `1e-10 and below`. `out` receives 10 values.
//
// # Safety
// `out` must point to 10 writable values.
enum RfStatus rf_risk_bands(const struct RfRiskReport *report, size_t *out);

// `(1 − p)^(N − n)`.
//
// # Safety
// `out` must be writable.
enum RfStatus rf_pop_unique_prob(double p_hat, uint64_t population, uint64_t sample, double *out);

// Swaps up to `max_records` sample uniques with `p̂ ≤ threshold`, lowest first,
// leaving every clique marginal of `model` unchanged. Writes the new table and
// the number of records swapped.
//
// # Safety
// Handles must be live and `model` fitted on `table`; `out` and `swapped` must be writable.
enum RfStatus rf_protect(const struct RfTable *table,
                         const struct RfModel *model,
                         double threshold,
                         size_t max_records,
                         struct RfTable **out,
                         size_t *swapped);

// Number of labelled chordal graphs on `m ≤ 7` vertices, by enumeration.
//
// # Safety
// `out` must be writable.
enum RfStatus rf_count_chordal(size_t m, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISKFOLD_H */
