#ifndef FIELDTAIL_H
#define FIELDTAIL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FIELDTAIL_BUILDING_LIBRARY)
#    define FT_API __declspec(dllexport)
#  else
#    define FT_API __declspec(dllimport)
#  endif
#else
#  define FT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns FT_OK or an error; on error ft_last_error() holds the
   message for the calling thread. Output pointers are untouched on error. */
typedef enum ft_status {
  FT_OK = 0,
  FT_INVALID_ARGUMENT,
  FT_POINT_OUTSIDE_DOMAIN,
  FT_NON_GAUSSIAN_SPEC,
  FT_NO_CONVERGENCE,
  FT_GRID_TOO_LARGE,
  FT_DEGENERATE_MAXIMUM,
  FT_QUADRATURE_NOT_CONVERGED,
  FT_ESS_TOO_SMALL,
  FT_NOT_CENTERED,
  FT_MGF_UNSTABLE,
  FT_RANGE_EXCEEDED,
  FT_NO_CANDIDATE_PASSES,
  FT_INSUFFICIENT_SCALES,
  FT_DEGENERATE_FIT,
  FT_CONFIG_INVALID,
  FT_EMPTY_DIRECTORY,
  FT_IO,
  FT_INTERNAL
} ft_status;

FT_API const char* ft_version(void);
FT_API const char* ft_status_name(ft_status status);
/* 1 when the status means bad input rather than a numeric failure. */
FT_API int ft_status_is_validation(ft_status status);
FT_API const char* ft_last_error(void);

/* 0 restores the default (FIELDTAIL_THREADS or hardware concurrency). */
FT_API void ft_set_threads(size_t n);
FT_API size_t ft_threads(void);

/* ---- field model ---- */

typedef struct ft_field_spec ft_field_spec;
typedef struct ft_field_sample ft_field_sample;

/* `json` is a field block as used in experiment configs. */
FT_API ft_status ft_field_spec_from_json(const char* json, ft_field_spec** out);
FT_API void ft_field_spec_free(ft_field_spec* spec);
FT_API size_t ft_field_spec_dim(const ft_field_spec* spec);

FT_API ft_status ft_field_sample_new(const ft_field_spec* spec, uint64_t replicate_id, ft_field_sample** out);
FT_API void ft_field_sample_free(ft_field_sample* sample);
FT_API ft_status ft_field_value(const ft_field_sample* sample, const double* x, double* out);

/* x0 receives dim coordinates; any output may be NULL. */
FT_API ft_status ft_field_max(const ft_field_sample* sample, double* M, double* x0, int* interior,
                              int* nondegenerate);
FT_API ft_status ft_pathwise_ratio(const ft_field_sample* sample, double lambda, double* out);

/* ---- phi functions and norms ---- */

typedef struct ft_phi ft_phi;

/* lambda0 may be +inf for an unbounded domain. */
FT_API ft_status ft_phi_gaussian(double lambda0, ft_phi** out);
FT_API ft_status ft_phi_power(double p, double lambda0, ft_phi** out);
FT_API ft_status ft_phi_pure_power(double p, ft_phi** out);
FT_API ft_status ft_phi_tabulated(const double* knots, const double* values, size_t n, ft_phi** out);
FT_API void ft_phi_free(ft_phi* phi);

FT_API ft_status ft_phi_eval(const ft_phi* phi, double lambda, double* out);
FT_API ft_status ft_young_fenchel(const ft_phi* phi, double u, double* out);
FT_API ft_status ft_phi_inverse(const ft_phi* phi, double r, double* out);
FT_API ft_status ft_bphi_norm(const double* samples, size_t n, const ft_phi* phi, double* out);
FT_API ft_status ft_gpsi_norm(const double* samples, size_t n, const ft_phi* phi, double* out);
FT_API ft_status ft_tail_bound_check(const double* samples, size_t n, const ft_phi* phi, double C, int* passes);

/* ---- tail asymptotics ---- */

FT_API ft_status ft_laplace44_ratio(double gamma, double p, double lambda, double* out);
FT_API ft_status ft_tauberian_ratio(double alpha, double C_R, double q, double lambda, double* out);

/* ---- experiment harness ---- */

typedef struct ft_run_result ft_run_result;

FT_API ft_status ft_config_validate(const char* path);

/* Runs the experiment described by the config (or manifest) at `path`.
   seed_override may be NULL. The result is allocated whenever the config
   could be read, even if the run failed, so paths and the exit code stay
   inspectable; the returned status names the failure. */
FT_API ft_status ft_run(const char* path, const uint64_t* seed_override, ft_run_result** out);
FT_API int ft_run_result_exit_code(const ft_run_result* r);
FT_API const char* ft_run_result_csv(const ft_run_result* r);
FT_API const char* ft_run_result_manifest(const ft_run_result* r);
FT_API const char* ft_run_result_error(const ft_run_result* r);
FT_API void ft_run_result_free(ft_run_result* r);

/* report_path stays valid until the next ft_summarize on this thread. */
FT_API ft_status ft_summarize(const char* dir, const char** report_path, size_t* skipped_rows);

FT_API size_t ft_oracle_count(void);
FT_API const char* ft_oracle_name(size_t i);
/* detail stays valid until the next ft_oracle_run on this thread. */
FT_API ft_status ft_oracle_run(const char* name, int* passed, const char** detail);

#ifdef __cplusplus
}
#endif

#endif
