/* C interface to the invariant matching library. All functions return
 * imp_status; every other result travels through out parameters. Objects
 * returned through imp_*_free-able handles stay valid until freed. String
 * pointers returned by accessors belong to their handle. On any failure
 * imp_last_error() holds a message for the calling thread. */

#ifndef IMP_H
#define IMP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum imp_status {
  IMP_OK = 0,
  IMP_ERR_INVALID_ARGUMENT = 1,
  IMP_ERR_INVALID_SPEC = 2,
  IMP_ERR_NON_FINITE_INPUT = 3,
  IMP_ERR_INSUFFICIENT_SAMPLES = 4,
  IMP_ERR_SINGULAR_COVARIANCE = 5,
  IMP_ERR_EMPTY_INPUT = 6,
  IMP_ERR_LENGTH_MISMATCH = 7,
  IMP_ERR_NO_ENVIRONMENT_VARIATION = 8,
  IMP_ERR_EMPTY_SELECTION = 9,
  IMP_ERR_GENERATION_FAILED = 10,
  IMP_ERR_EXPERIMENT_ABORTED = 11,
  IMP_ERR_UNKNOWN_PRESET = 12,
  IMP_ERR_IO = 13,
  IMP_ERR_BAD_FORMAT = 14,
  IMP_ERR_INTERNAL = 15
} imp_status;

const char* imp_status_name(imp_status status);

/* Message of the most recent failing call on this thread; empty after a
 * success. */
const char* imp_last_error(void);

typedef struct imp_spec imp_spec;
typedef struct imp_data imp_data;
typedef struct imp_model imp_model;
typedef struct imp_report imp_report;

/* Specs */
imp_status imp_spec_load(const char* path, imp_spec** out);
imp_status imp_spec_save(const imp_spec* spec, const char* path);

/* IMP_OK for a well-posed spec; IMP_ERR_INVALID_SPEC with one violation per
 * line in imp_last_error() otherwise. */
imp_status imp_spec_check(const imp_spec* spec);

int imp_spec_dim(const imp_spec* spec);
size_t imp_spec_env_count(const imp_spec* spec);
const char* imp_spec_env_label(const imp_spec* spec, size_t index);

/* Data */

/* Draws n_per_env rows from every environment of the spec, deterministically
 * from seed. The result carries a response column. */
imp_status imp_data_sample(const imp_spec* spec, int n_per_env, uint64_t seed,
                           imp_data** out);
imp_status imp_data_load_csv(const char* path, imp_data** out);
imp_status imp_data_save_csv(const imp_data* data, const char* path);
imp_status imp_data_save_env_csv(const imp_data* data, size_t env_index,
                                 const char* path);

int imp_data_dim(const imp_data* data);
int imp_data_has_response(const imp_data* data);
size_t imp_data_env_count(const imp_data* data);
const char* imp_data_env_label(const imp_data* data, size_t index);
size_t imp_data_env_rows(const imp_data* data, size_t index);
size_t imp_data_row_count(const imp_data* data);

/* Copies the response in original row order into out[0..row_count). */
imp_status imp_data_response_copy(const imp_data* data, double* out);

/* Training and prediction */

/* Algorithm parameters: alpha_quantile in [0, 1]; max_subset_size caps the
 * conditioning sets, pass 0 for no cap. */
imp_status imp_train(const imp_data* train, double alpha_quantile,
                     int max_subset_size, imp_model** out);
imp_status imp_model_load(const char* path, imp_model** out);
imp_status imp_model_save(const imp_model* model, const char* path);

int imp_model_dim(const imp_model* model);
double imp_model_alpha_quantile(const imp_model* model);
double imp_model_epsilon(const imp_model* model);
size_t imp_model_candidate_count(const imp_model* model);
size_t imp_model_selected_count(const imp_model* model);
const char* imp_model_selected_name(const imp_model* model, size_t index);
double imp_model_selected_rss(const imp_model* model, size_t index);

/* Predictions in the original row order of `test`, written to out[0..row_count). */
imp_status imp_predict(const imp_model* model, const imp_data* test, double* out);

/* Writes env,y_hat rows for `values` in the original row order of `data`. */
imp_status imp_predictions_save_csv(const imp_data* data, const double* values,
                                    const char* path);

imp_status imp_evaluate_rss(const double* pred, const double* truth, size_t n,
                            double* out);

/* Benchmarks */

/* Runs one preset ("A", "B1" or "B2"); n_models <= 0 keeps the preset's
 * default count. */
imp_status imp_bench(const char* preset, int n_models, uint64_t seed,
                     imp_report** out);
imp_status imp_report_save(const imp_report* report, const char* csv_path,
                           const char* json_path);

size_t imp_report_method_count(const imp_report* report);
const char* imp_report_method(const imp_report* report, size_t index);
double imp_report_median(const imp_report* report, size_t index);
double imp_report_variance(const imp_report* report, size_t index);
size_t imp_report_model_count(const imp_report* report, size_t index);
size_t imp_report_failure_count(const imp_report* report);

void imp_spec_free(imp_spec* spec);
void imp_data_free(imp_data* data);
void imp_model_free(imp_model* model);
void imp_report_free(imp_report* report);

#ifdef __cplusplus
}
#endif

#endif /* IMP_H */
