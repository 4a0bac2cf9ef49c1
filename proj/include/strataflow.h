#ifndef STRATAFLOW_H
#define STRATAFLOW_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

/* Status codes; values are stable. */
typedef enum sf_status {
    SF_OK = 0,
    SF_ERR_INVALID_ARGUMENT = 1,
    SF_ERR_INVALID_PROFILE = 2,
    SF_ERR_NO_BED_REACHED = 3,
    SF_ERR_NON_MONOTONE = 4,
    SF_ERR_NO_MINIMUM_IN_RANGE = 5,
    SF_ERR_DEGENERATE_DENOMINATOR = 6,
    SF_ERR_LB_VIOLATED = 7,
    SF_ERR_STAGNATION_GUARD = 8,
    SF_ERR_NO_CONVERGENCE = 9,
    SF_ERR_SINGULAR_JACOBIAN = 10,
    SF_ERR_STEP_FAILURE = 11,
    SF_ERR_MONITOR_STOP = 12,
    SF_ERR_INVALID_FIELD = 13,
    SF_ERR_PARSE = 14,
    SF_ERR_IO = 15,
    SF_ERR_INTERNAL = 16
} sf_status;

typedef struct sf_config sf_config;
typedef struct sf_bundle sf_bundle;

SF_API const char* sf_version(void);
SF_API const char* sf_status_name(sf_status status);
/* Message of the last failed call on this thread; empty after a success. */
SF_API const char* sf_last_error(void);
/* Frees strings returned through char** out-parameters. */
SF_API void sf_string_free(char* s);

/* Configuration: `key = value` text. Relative table paths resolve against base_dir
   (the file's directory for sf_config_load). */
SF_API sf_status sf_config_load(const char* path, sf_config** out);
SF_API sf_status sf_config_parse(const char* text, const char* base_dir, sf_config** out);
SF_API void sf_config_free(sf_config* cfg);
SF_API sf_status sf_config_serialize(const sf_config* cfg, char** out);
/* Overrides one key with the config grammar, e.g. ("steps", "10"). */
SF_API sf_status sf_config_set(sf_config* cfg, const char* key, const char* value);
/* Output directory as configured; owned by cfg. */
SF_API const char* sf_config_output(const sf_config* cfg);

/* Profile bundle built from a config. */
SF_API sf_status sf_bundle_create(const sf_config* cfg, sf_bundle** out);
SF_API void sf_bundle_free(sf_bundle* b);
SF_API sf_status sf_bundle_epsilon0(const sf_bundle* b, double* out);
SF_API sf_status sf_bundle_lambda_min(const sf_bundle* b, double* out);
SF_API sf_status sf_bundle_size_condition(const sf_bundle* b, int* holds, double* margin);
/* Depth d and Bernoulli constant Q of the laminar flow at lambda. */
SF_API sf_status sf_laminar(const sf_bundle* b, double lambda, double* d, double* Q);
/* Bifurcation point of the principal eigenvalue problem with Np nodes. */
SF_API sf_status sf_lambda_star(const sf_bundle* b, int Np, double* lambda_star, double* Q_star);

/* Pipeline stages. Each writes its artifacts under the configured output directory
   and returns its JSON summary in *json_out (free with sf_string_free). */
SF_API sf_status sf_run_check(const sf_config* cfg, char** json_out);
SF_API sf_status sf_run_laminar(const sf_config* cfg, double lambda, char** json_out);
SF_API sf_status sf_run_laminar_sweep(const sf_config* cfg, double lo, double hi, int n, char** json_out);
SF_API sf_status sf_run_bifurcate(const sf_config* cfg, char** json_out);
SF_API sf_status sf_run_continue(const sf_config* cfg, char** json_out);
SF_API sf_status sf_run_pipeline(const sf_config* cfg, char** json_out);
/* report_path may be NULL; refine != 0 adds the doubled-grid residual ratio. */
SF_API sf_status sf_run_verify(const char* snapshot_csv, const char* report_path, int refine, char** json_out);
/* cartesian_ny > 0 also writes a Cartesian resampling. */
SF_API sf_status sf_run_export(const char* snapshot_csv, const char* out_stem, int cartesian_ny, char** json_out);

#ifdef __cplusplus
}
#endif

#endif
