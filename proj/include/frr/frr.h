#ifndef FRR_FRR_H
#define FRR_FRR_H

/*
 * C interface to the functional ridge regression library.
 *
 * Every call returns an frr_status. On failure the message of the last error
 * raised on the calling thread is available from frr_last_error(). Strings
 * returned through char** out-parameters are heap allocated and must be
 * released with frr_string_free().
 */

#include <stddef.h>

#if defined(FRR_BUILDING_LIBRARY)
#define FRR_API __attribute__((visibility("default")))
#else
#define FRR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum frr_status {
  FRR_OK = 0,
  FRR_ERR_VALIDATION = 1,
  FRR_ERR_DOMAIN = 2,
  FRR_ERR_CONDITIONING = 3,
  FRR_ERR_DEGENERATE = 4,
  FRR_ERR_SELECTION = 5,
  FRR_ERR_IO = 6,
  FRR_ERR_INTERNAL = 99
} frr_status;

typedef struct frr_study frr_study;
typedef struct frr_dataset frr_dataset;
typedef struct frr_analysis frr_analysis;

typedef enum frr_study_artifact {
  FRR_STUDY_REPORT_JSON = 0,
  FRR_STUDY_REPLICATIONS_CSV = 1,
  FRR_STUDY_IMSE_TABLE_CSV = 2,
  FRR_STUDY_PARTITION_TABLE_CSV = 3,
  FRR_STUDY_CN_TABLE_CSV = 4,
  FRR_STUDY_RESOLVED_CONFIG_JSON = 5
} frr_study_artifact;

typedef enum frr_fit_artifact {
  FRR_FIT_COEFFICIENTS_CSV = 0,
  FRR_FIT_GCV_TRACE_CSV = 1,
  FRR_FIT_JSON = 2
} frr_fit_artifact;

FRR_API const char* frr_version(void);
/* Message of the last failure on this thread; empty when none. */
FRR_API const char* frr_last_error(void);
FRR_API void frr_string_free(char* s);

/* B-spline values at s for a clamped uniform basis; out_len must equal order + interior_knots. */
FRR_API frr_status frr_eval_basis(double s, double lo, double hi, int order, int interior_knots, double* out,
                                  size_t out_len);
FRR_API frr_status frr_normal_quantile(double prob, double* out);

/* Simulation studies. config_json may be NULL or empty for the defaults.
   threads <= 0 selects the FRR_THREADS environment variable or the hardware count. */
FRR_API frr_status frr_default_study_config(char** out_json);
/* Study configuration with every default filled in; nothing is run. */
FRR_API frr_status frr_resolve_study_config(const char* config_json, char** out_json);
FRR_API frr_status frr_study_run(const char* config_json, int threads, frr_study** out);
FRR_API frr_status frr_study_counts(const frr_study* study, int* succeeded, int* failed);
FRR_API frr_status frr_study_render(const frr_study* study, frr_study_artifact artifact, char** out);
FRR_API void frr_study_free(frr_study* study);

/* Long-format data: subject_id,predictor_id,grid_point,value; response: subject_id,y. */
FRR_API frr_status frr_dataset_load(const char* data_path, const char* response_path, frr_dataset** out);
FRR_API frr_status frr_dataset_shape(const frr_dataset* ds, int* subjects, int* predictors, int* grid_points);
FRR_API void frr_dataset_free(frr_dataset* ds);

/* Fit configuration with every default filled in. */
FRR_API frr_status frr_resolve_fit_config(const frr_dataset* ds, const char* config_json, char** out_json);
FRR_API frr_status frr_analysis_run(const frr_dataset* ds, const char* config_json, frr_analysis** out);
FRR_API frr_status frr_analysis_render(const frr_analysis* fit, frr_fit_artifact artifact, char** out);
FRR_API void frr_analysis_free(frr_analysis* fit);

/* Confidence interval for the functional given by x_path (predictor_id,grid_point,value). */
FRR_API frr_status frr_infer(const frr_dataset* ds, const char* config_json, const char* x_path, char** out_json);

/* Tidy long-format tables for external plotting. */
FRR_API frr_status frr_plotdata_metrics(const char* report_json, char** out_csv);
FRR_API frr_status frr_plotdata_partition(const char* report_json, char** out_csv);
FRR_API frr_status frr_plotdata_gcv(const char* gcv_trace_csv, char** out_csv);

FRR_API frr_status frr_sha256_hex(const char* bytes, size_t len, char** out_hex);

#ifdef __cplusplus
}
#endif

#endif
