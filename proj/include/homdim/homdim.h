/* homdim: periodic orbit counting in homology classes for symbolic flows.
 *
 * Every call returns an hd_status; on failure hd_last_error() holds a
 * message for the calling thread. Handles are opaque and released with the
 * matching *_free function. Strings returned through char** are owned by
 * the caller and released with hd_string_free.
 */
#ifndef HOMDIM_H
#define HOMDIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(HOMDIM_BUILDING)
#define HD_API __declspec(dllexport)
#else
#define HD_API __declspec(dllimport)
#endif
#else
#define HD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hd_status {
  HD_OK = 0,
  HD_ERR_INPUT = 1,    /* malformed or invalid input */
  HD_ERR_RANGE = 2,    /* query outside a computed range */
  HD_ERR_IO = 3,
  HD_ERR_RESOURCE = 4, /* budget exceeded */
  HD_ERR_NUMERIC = 5,
  HD_ERR_DOMAIN = 6,
  HD_ERR_INTERNAL = 7
} hd_status;

typedef struct hd_flow hd_flow;
typedef struct hd_histogram hd_histogram;
typedef struct hd_model hd_model;
typedef struct hd_set hd_set;
typedef struct hd_norm hd_norm;
typedef struct hd_config hd_config;

HD_API const char* hd_version(void);
HD_API const char* hd_last_error(void);
HD_API const char* hd_status_name(hd_status status);
/* Process exit status: 0 ok, 2 validation, 3 resource, 4 numeric/domain, 1 internal. */
HD_API int hd_exit_code(hd_status status);
HD_API void hd_string_free(char* s);

/* ---- flows ---- */
HD_API hd_status hd_flow_builtin(const char* name, hd_flow** out);
HD_API hd_status hd_flow_load(const char* path, hd_flow** out);
HD_API hd_status hd_flow_parse(const char* yaml_text, hd_flow** out);
/* Builtin name, else a flow file path. */
HD_API hd_status hd_flow_resolve(const char* name_or_path, hd_flow** out);
HD_API void hd_flow_free(hd_flow* flow);
HD_API size_t hd_flow_rank(const hd_flow* flow);
HD_API size_t hd_flow_num_states(const hd_flow* flow);
HD_API size_t hd_flow_num_edges(const hd_flow* flow);
HD_API hd_status hd_flow_validate(const hd_flow* flow, int* irreducible, int* aperiodic,
                                  size_t* period, double* r_min);
HD_API hd_status hd_flow_serialize(const hd_flow* flow, char** out);
/* Newline-separated builtin model names. */
HD_API hd_status hd_builtin_names(char** out);

/* ---- orbits ---- */
HD_API hd_status hd_word_length_bound(const hd_flow* flow, double t, size_t* out);
HD_API hd_status hd_orbits_enumerate(const hd_flow* flow, double t, size_t budget,
                                     unsigned threads, hd_histogram** out);
HD_API void hd_histogram_free(hd_histogram* hist);
HD_API double hd_histogram_t_max(const hd_histogram* hist);
HD_API hd_status hd_histogram_total(const hd_histogram* hist, double t, uint64_t* out);
HD_API hd_status hd_histogram_count_class(const hd_histogram* hist, const int64_t* alpha,
                                          size_t k, double t, uint64_t* out);
HD_API hd_status hd_histogram_count_set(const hd_histogram* hist, const hd_set* set, double t,
                                        uint64_t* out);
/* CSV: length, class_1..class_k, count. */
HD_API hd_status hd_histogram_csv(const hd_histogram* hist, char** out);
/* Closed edge-walks of word length n by class. CSV: class_1..class_k, count. */
HD_API hd_status hd_transfer_count_csv(const hd_flow* flow, size_t n, char** out);

/* ---- thermodynamics ---- */
HD_API hd_status hd_pressure(const hd_flow* flow, const double* xi, size_t k, double* out);
HD_API hd_status hd_grad_pressure(const hd_flow* flow, const double* xi, size_t k, double* out);
/* out: k*k, row-major. */
HD_API hd_status hd_hessian_pressure(const hd_flow* flow, const double* xi, size_t k,
                                     double* out);
HD_API hd_status hd_sigma(const hd_flow* flow, const double* xi, size_t k, double* out);
HD_API hd_status hd_check_vanishing_winding(const hd_flow* flow, double tol, int* out);
HD_API hd_status hd_legendre(const hd_flow* flow, const double* rho, size_t k, double* xi_out,
                             double* entropy_out);

HD_API hd_status hd_model_build(const hd_flow* flow, int enforce_vanishing_winding,
                                double winding_tol, hd_model** out);
HD_API void hd_model_free(hd_model* model);
HD_API size_t hd_model_rank(const hd_model* model);
HD_API double hd_model_entropy(const hd_model* model);
HD_API double hd_model_sigma(const hd_model* model);
HD_API int hd_model_winding_vanishes(const hd_model* model);
/* k entries. */
HD_API void hd_model_winding(const hd_model* model, double* out);
/* k*k, row-major. */
HD_API void hd_model_hessian0(const hd_model* model, double* out);
HD_API void hd_model_hform(const hd_model* model, double* out);
HD_API hd_status hd_model_norm(const hd_model* model, hd_norm** out);

/* ---- asymptotics (log scale) ---- */
HD_API hd_status hd_margulis_total_log(const hd_model* model, double t, double* out);
HD_API hd_status hd_central_count_log(const hd_model* model, double t, double* out);
HD_API hd_status hd_predicted_count_log(const hd_model* model, const int64_t* alpha, size_t k,
                                        double t, double* out);
HD_API hd_status hd_gaussian_term_log(const hd_model* model, const int64_t* alpha, size_t k,
                                      double t, double* out);
HD_API hd_status hd_gaussian_sum(const hd_model* model, const hd_set* set, double t, double r,
                                 double* out);
HD_API hd_status hd_predicted_D(const hd_model* model, const hd_set* set, double t, double eta,
                                double* out);
HD_API hd_status hd_tail_integral(size_t k, double sigma, double eta, double t, double* numeric,
                                  double* bound, double* log_numeric, double* log_bound);

/* ---- lattice ---- */
HD_API hd_status hd_norm_create(const double* form, size_t k, hd_norm** out);
HD_API hd_status hd_norm_identity(size_t k, hd_norm** out);
HD_API void hd_norm_free(hd_norm* norm);
HD_API size_t hd_norm_rank(const hd_norm* norm);
HD_API hd_status hd_norm_eval(const hd_norm* norm, const double* v, size_t k, double* out);
HD_API hd_status hd_fundamental_floor(const double* rho, size_t k, int64_t* out);

/* Set spec in YAML, e.g. "{kind: power, q: 2}". */
HD_API hd_status hd_set_parse(const char* yaml_text, size_t k, hd_set** out);
HD_API void hd_set_free(hd_set* set);
HD_API size_t hd_set_rank(const hd_set* set);
HD_API hd_status hd_set_describe(const hd_set* set, char** out);
HD_API hd_status hd_set_declared_delta(const hd_set* set, int* has_delta, double* out);
HD_API hd_status hd_set_contains(const hd_set* set, const int64_t* alpha, size_t k, int* out);
HD_API hd_status hd_count_ball(const hd_set* set, const hd_norm* norm, double r, uint64_t* out);
HD_API hd_status hd_kappa(const hd_set* set, const hd_norm* norm, double r, double delta,
                          double* out);
HD_API hd_status hd_estimate_dimension(const hd_set* set, const hd_norm* norm,
                                       const double* radii, size_t n, double* delta_hat,
                                       double* residual, double* r_lo, double* r_hi);
/* CSV: alpha_1..alpha_k, norm; lexicographic. */
HD_API hd_status hd_ball_csv(const hd_set* set, const hd_norm* norm, double r, char** out);

/* ---- config and experiments ---- */
HD_API hd_status hd_config_load(const char* path, const char* const* overrides,
                                size_t n_overrides, hd_config** out);
HD_API hd_status hd_config_parse(const char* yaml_text, const char* base_dir,
                                 const char* const* overrides, size_t n_overrides,
                                 hd_config** out);
HD_API void hd_config_free(hd_config* config);
HD_API hd_status hd_config_serialize(const hd_config* config, char** out);
HD_API hd_status hd_config_equal(const hd_config* a, const hd_config* b, int* out);
HD_API hd_status hd_config_flow(const hd_config* config, hd_flow** out);
HD_API hd_status hd_config_set(const hd_config* config, hd_set** out);
/* Model built with the config's winding gate and tolerance. */
HD_API hd_status hd_config_model(const hd_config* config, hd_model** out);
/* Dimension estimate over the config's dimension section; text report. */
HD_API hd_status hd_config_dimension(const hd_config* config, double* delta_hat,
                                     double* residual, char** report);
/* Writes the report to output_path (or the config's output when NULL/empty)
 * and returns its text through report (may be NULL). */
HD_API hd_status hd_experiment_run(const hd_config* config, const char* output_path,
                                   char** report);
HD_API hd_status hd_experiment_lemmas(const hd_config* config, int* all_pass, char** report);
/* CSV: T, D over the enumeration grid. */
HD_API hd_status hd_experiment_density(const hd_config* config, char** csv);

#ifdef __cplusplus
}
#endif

#endif /* HOMDIM_H */
