/* C interface to the fairflip library.
 *
 * All entry points return a status code (FF_OK on success) and report
 * details through ff_last_error(), which is thread local. Objects are
 * opaque handles released with their ff_*_free function; strings returned
 * through char** outputs are released with ff_string_free.
 *
 * Structured inputs and outputs travel as JSON text so the surface stays
 * small and stable; see the project README for the schemas.
 */
#ifndef FAIRFLIP_H
#define FAIRFLIP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FF_API __declspec(dllexport)
#else
#define FF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  FF_OK = 0,
  FF_ERR_INVALID_ARGUMENT = 1,
  FF_ERR_SCHEMA = 2,
  FF_ERR_DATA = 3,
  FF_ERR_SOLVE = 4,
  FF_ERR_IO = 5,
  FF_ERR_SIZE = 6
};

typedef struct ff_dataset ff_dataset;
typedef struct ff_model ff_model;
typedef struct ff_result ff_result;

FF_API const char* ff_version(void);
FF_API const char* ff_last_error(void);
FF_API void ff_string_free(char* s);

/* ---- datasets ---- */

/* schema_json: {"group_column": str, "category_a": str, "category_b": str,
 *               "label_column": str, "positive_value": str,
 *               "merit_columns": [str, ...]} */
FF_API int ff_dataset_load_csv(const char* path, const char* schema_json, ff_dataset** out);
FF_API int ff_dataset_from_csv_text(const char* text, const char* schema_json, ff_dataset** out);

/* Deterministic synthetic dataset; planted_json receives the generator truth
 * (coefficients, shift, realized alpha). */
FF_API int ff_dataset_synthetic(size_t n, size_t p, double alpha_target, double group_fraction,
                                uint64_t seed, ff_dataset** out, char** planted_json);

FF_API int ff_dataset_write_csv_text(const ff_dataset* ds, char** csv);
FF_API int ff_dataset_num_rows(const ff_dataset* ds, size_t* out);
FF_API int ff_dataset_num_features(const ff_dataset* ds, size_t* out);
FF_API int ff_dataset_dropped_rows(const ff_dataset* ds, size_t* out);
FF_API void ff_dataset_free(ff_dataset* ds);

/* Bias report: {"spec_version", "alpha", "higher_rate_group", counts, rates}. */
FF_API int ff_measure(const ff_dataset* ds, char** report_json);

/* ---- debias ---- */

/* options_json keys (all optional): epsilon, delta, kind ("logistic"|"svm"),
 * mode ("alternating"|"exact_enum"), C, lambda, gap_tol, max_iter, big_m,
 * directional (bool), max_rounds, node_limit. */
FF_API int ff_debias(const ff_dataset* ds, const char* options_json, ff_result** out);

FF_API int ff_result_json(const ff_result* result, char** json);
FF_API int ff_result_flips_csv(const ff_result* result, const ff_dataset* ds, char** csv);
FF_API int ff_result_model(const ff_result* result, ff_model** out);
FF_API void ff_result_free(ff_result* result);

/* Tidy trade-off table: CSV "epsilon,column,delta_change,status". */
FF_API int ff_tradeoff(const ff_dataset* ds, const char* options_json, char** csv);

/* Three-class explanation tree fitted on flip outcomes. flips_csv is the
 * text of a flip report produced by ff_result_flips_csv. options_json keys:
 * seed, split_fraction, folds, min_leaf. Returns a JSON document bundling
 * the tree, its text rendering, the cross-validation report and the
 * (accuracy, epsilon, delta) summary. */
FF_API int ff_explain(const ff_dataset* ds, const char* flips_csv, const char* options_json,
                      char** report_json);

/* ---- models ---- */

FF_API int ff_model_to_json(const ff_model* model, char** json);
FF_API int ff_model_from_json(const char* json, ff_model** out);
FF_API int ff_model_predict(const ff_model* model, const double* features, size_t p,
                            const char* group_category, double* score, int* label);
/* Metrics: {"spec_version", "auc", "parity_gap", confusion counts}. */
FF_API int ff_evaluate(const ff_model* model, const ff_dataset* ds, char** metrics_json);
FF_API void ff_model_free(ff_model* model);

#ifdef __cplusplus
}
#endif

#endif /* FAIRFLIP_H */
