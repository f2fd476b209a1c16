/* isomix: covariate-dependent stable-isotope mixing models fitted by
 * fixed-form Gaussian variational Bayes.
 *
 * C interface to the shared library.  All functions returning
 * isomix_status set a thread-local error message retrievable via
 * isomix_last_error() on failure.  Objects returned through out-pointers
 * are owned by the caller and released with the matching _free function.
 */
#ifndef ISOMIX_H
#define ISOMIX_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isomix_status {
    ISOMIX_OK = 0,
    ISOMIX_ERR_INVALID_ARGUMENT = 1,
    ISOMIX_ERR_IO = 2,
    ISOMIX_ERR_NUMERIC = 3,
    ISOMIX_ERR_INTERNAL = 4
} isomix_status;

typedef struct isomix_dataset isomix_dataset;
typedef struct isomix_model isomix_model;
typedef struct isomix_prediction isomix_prediction;
typedef struct isomix_table isomix_table;

/* Message from the most recent failing call on this thread ("" if none). */
const char* isomix_last_error(void);
const char* isomix_version(void);

/* Frees strings returned through char** out-parameters. */
void isomix_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */
/* ------------------------------------------------------------------ */

/* Loads CSV inputs.  tdf_csv / concentration_csv / covariates_csv may be
 * NULL (defaults: zero TDFs, unit concentrations, intercept-only design).
 * covariate_spec is "name:kind,..." with kind continuous|categorical; NULL
 * or "" uses every covariate column with auto-detected kinds. */
isomix_status isomix_dataset_load(const char* mixtures_csv,
                                  const char* sources_csv,
                                  const char* tdf_csv,
                                  const char* concentration_csv,
                                  const char* covariates_csv,
                                  const char* covariate_spec,
                                  isomix_dataset** out);
void isomix_dataset_free(isomix_dataset* dataset);

isomix_status isomix_dataset_dims(const isomix_dataset* dataset, int32_t* n_obs,
                                  int32_t* n_tracers, int32_t* n_sources,
                                  int32_t* n_design_cols);

/* Mixing-polygon check: per-observation inside/outside table plus the
 * number of observations outside (advisory; never fails the fit). */
isomix_status isomix_dataset_geometry(const isomix_dataset* dataset,
                                      isomix_table** report,
                                      int32_t* n_outside);

/* Iso-space scatter data for a tracer pair; color_by may be NULL. */
isomix_status isomix_dataset_isospace(const isomix_dataset* dataset,
                                      int32_t tracer_x, int32_t tracer_y,
                                      const char* color_by, isomix_table** out);

/* ------------------------------------------------------------------ */
/* Fitting                                                             */
/* ------------------------------------------------------------------ */

/* prior_json / config_json: JSON objects overriding defaults (NULL or ""
 * keeps all defaults).  mode is "paper" or "generative" (NULL = paper). */
isomix_status isomix_fit(const isomix_dataset* dataset, const char* prior_json,
                         const char* config_json, const char* mode,
                         isomix_model** out);

isomix_status isomix_model_save(const isomix_model* model, const char* path);
isomix_status isomix_model_load(const char* path, isomix_model** out);
void isomix_model_free(isomix_model* model);

/* Model-to-JSON (same content as isomix_model_save). */
isomix_status isomix_model_to_json(const isomix_model* model, char** json_text);

/* Short human-readable fit report. */
isomix_status isomix_model_report(const isomix_model* model, char** text);

/* ------------------------------------------------------------------ */
/* Outputs                                                             */
/* ------------------------------------------------------------------ */

/* kind: "statistics" | "quantiles" | "correlations".  obs_ids are 1-based;
 * n_obs_ids 0 defaults to observation 1. */
isomix_status isomix_model_summary(const isomix_model* model,
                                   const int32_t* obs_ids, int32_t n_obs_ids,
                                   const char* kind, isomix_table** out);
isomix_status isomix_model_summary_text(const isomix_model* model,
                                        const int32_t* obs_ids,
                                        int32_t n_obs_ids, const char* kind,
                                        char** text);

/* Predictions at new raw-scale covariate rows given as a CSV file. */
isomix_status isomix_model_predict(const isomix_model* model,
                                   const char* newdata_csv,
                                   isomix_prediction** out);
void isomix_prediction_free(isomix_prediction* prediction);
isomix_status isomix_prediction_summary(const isomix_prediction* prediction,
                                        const char* kind, isomix_table** out);
isomix_status isomix_prediction_summary_text(const isomix_prediction* prediction,
                                             const char* kind, char** text);
isomix_status isomix_prediction_to_json(const isomix_prediction* prediction,
                                        char** json_text);

/* Posterior-predictive check at central prob_level intervals. */
isomix_status isomix_model_posterior_predictive(const isomix_model* model,
                                                double prob_level, uint64_t seed,
                                                isomix_table** intervals,
                                                double* coverage);

/* Full posterior-predictive artifact set written into out_dir:
 * intervals.csv, coverage.json, and one SVG figure per tracer. */
isomix_status isomix_model_posterior_predictive_files(const isomix_model* model,
                                                      double prob_level,
                                                      uint64_t seed,
                                                      const char* out_dir,
                                                      double* coverage);

/* LOO: per-model table (elpd_loo, looic, se_looic, flagged count). */
isomix_status isomix_model_loo(const isomix_model* model, isomix_table** out);

/* Comparison table across models, rows in the given order. */
isomix_status isomix_compare(const isomix_model* const* models,
                             const char* const* labels, int32_t n_models,
                             isomix_table** out);

/* Convergence trace (iteration, lower bound, moving average). */
isomix_status isomix_model_trace(const isomix_model* model, isomix_table** out);

/* Plot emission: kind as in the CLI; writes the SVG and/or the data CSV
 * (either path may be NULL to skip).  options_json supports obs_id,
 * covariate, tracer_x, tracer_y, bins, grid_points, n_prior_draws, seed. */
isomix_status isomix_model_plot(const isomix_model* model, const char* kind,
                                const char* options_json, const char* svg_path,
                                const char* csv_path);

/* Simulated dataset in the standard CSV schemas plus truth.json, written
 * into out_dir.  preset: "low" | "medium" | "high". */
isomix_status isomix_simulate(const char* preset, uint64_t seed,
                              const char* out_dir);

/* ------------------------------------------------------------------ */
/* Tables                                                              */
/* ------------------------------------------------------------------ */

int32_t isomix_table_rows(const isomix_table* table);
int32_t isomix_table_cols(const isomix_table* table);
const char* isomix_table_column_name(const isomix_table* table, int32_t col);
/* 1 if the cell is numeric (then *value is set), 0 otherwise. */
int32_t isomix_table_number(const isomix_table* table, int32_t row, int32_t col,
                            double* value);
/* Cell as text (numbers formatted); pointer valid until the table is freed
 * or this function is called again. */
const char* isomix_table_text(const isomix_table* table, int32_t row,
                              int32_t col);
isomix_status isomix_table_write_csv(const isomix_table* table,
                                     const char* path);
isomix_status isomix_table_to_csv(const isomix_table* table, char** csv_text);
isomix_status isomix_table_to_json(const isomix_table* table, char** json_text);
void isomix_table_free(isomix_table* table);

#ifdef __cplusplus
}
#endif

#endif /* ISOMIX_H */
