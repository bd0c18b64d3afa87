#ifndef RESILIENCE_RESILIENCE_H
#define RESILIENCE_RESILIENCE_H

#include <stddef.h>

#if defined(RSL_BUILDING_LIBRARY)
#define RSL_API __attribute__((visibility("default")))
#else
#define RSL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsl_status {
    RSL_OK = 0,
    RSL_INVALID_ARGUMENT = 1,
    RSL_PARSE = 2,
    RSL_DOMAIN = 3,
    RSL_NUMERICAL = 4,
    RSL_CONFIG = 5,
    RSL_INTERNAL = 6,
    /* run completed but at least one indicator is undefined or failed */
    RSL_INDICATOR_FAILED = 7
} rsl_status;

typedef struct rsl_model rsl_model;
typedef struct rsl_report rsl_report;

RSL_API const char* rsl_version(void);

/* Message of the last failing call on this thread; empty after success. */
RSL_API const char* rsl_last_error(void);

/* params_json: JSON object of parameter overrides, or NULL for defaults. */
RSL_API rsl_status rsl_model_from_registry(const char* name, const char* params_json, rsl_model** out);
/* model_json: {"expr": {...}, "params": {...}, "attractor": {...}} as in run configs. */
RSL_API rsl_status rsl_model_from_json(const char* model_json, rsl_model** out);
RSL_API void rsl_model_free(rsl_model* model);

RSL_API size_t rsl_model_dimension(const rsl_model* model);
RSL_API rsl_status rsl_model_eval(const rsl_model* model, double t, const double* x, double* dx);
/* Row-major n*n Jacobian. */
RSL_API rsl_status rsl_model_jacobian(const rsl_model* model, const double* x, double* jac);
/* State at time t from x0 at time 0. */
RSL_API rsl_status rsl_flow(const rsl_model* model, const double* x0, double t, double* out);

typedef struct rsl_local_report {
    double ev;
    double t_r;
    double reactivity;
    int reactive;
    double rho_max;
    double t_max;
    double v_s;
    double i_s;
    double v_d;
    double i_d;
} rsl_local_report;

RSL_API rsl_status rsl_local_indicators(const rsl_model* model, const double* x_eq, rsl_local_report* out);
/* a: row-major n*n matrix. */
RSL_API rsl_status rsl_local_indicators_matrix(size_t n, const double* a, rsl_local_report* out);

/* Validates and runs one JSON config. The report is returned for RSL_OK and
   RSL_INDICATOR_FAILED; otherwise *out is NULL. */
RSL_API rsl_status rsl_run(const char* config_json, rsl_report** out);
RSL_API int rsl_report_success(const rsl_report* report);
RSL_API size_t rsl_report_artifact_count(const rsl_report* report);
RSL_API const char* rsl_report_artifact_name(const rsl_report* report, size_t i);
RSL_API const char* rsl_report_artifact_data(const rsl_report* report, size_t i);
RSL_API size_t rsl_report_artifact_size(const rsl_report* report, size_t i);
/* JSON summary including the effective config. */
RSL_API const char* rsl_report_summary(const rsl_report* report);
RSL_API void rsl_report_free(rsl_report* report);

#ifdef __cplusplus
}
#endif

#endif
