#ifndef BERKSON_BERKSON_H
#define BERKSON_BERKSON_H

/* Sieve maximum likelihood for nonparametric regression with Berkson
 * measurement error and an instrument.
 *
 * All handles are opaque. Every function that can fail returns a bk_status;
 * on failure bk_last_error() describes the problem (per thread, valid until
 * the next failing call on that thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BERKSON_BUILDING_LIBRARY)
#    define BK_API __declspec(dllexport)
#  else
#    define BK_API __declspec(dllimport)
#  endif
#else
#  define BK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bk_status {
    BK_OK = 0,
    BK_ERR_USAGE = 1,     /* bad arguments, configuration, input or output files */
    BK_ERR_NUMERICAL = 2, /* optimizer or linear algebra failure */
    BK_ERR_INTERNAL = 3
} bk_status;

typedef enum bk_density {
    BK_DENSITY_DX = 0, /* Berkson error X* - X */
    BK_DENSITY_DY = 1, /* outcome error */
    BK_DENSITY_DZ = 2  /* instrument error */
} bk_density;

typedef struct bk_config bk_config;
typedef struct bk_dataset bk_dataset;
typedef struct bk_fit bk_fit;

BK_API const char* bk_version(void);
BK_API const char* bk_last_error(void);

/* Configuration: defaults, then key = value files and single assignments.
 * Later assignments win. */
BK_API bk_status bk_config_create(bk_config** out);
BK_API bk_status bk_config_load(bk_config* cfg, const char* path);
BK_API bk_status bk_config_set(bk_config* cfg, const char* key, const char* value);
BK_API void bk_config_free(bk_config* cfg);

/* Datasets of (x, y, z) rows. */
BK_API bk_status bk_dataset_read_csv(const char* path, bk_dataset** out);
BK_API bk_status bk_dataset_from_arrays(const double* x, const double* y, const double* z, size_t n,
                                        bk_dataset** out);
BK_API size_t bk_dataset_size(const bk_dataset* d);
BK_API bk_status bk_dataset_row(const bk_dataset* d, size_t i, double* x, double* y, double* z);
BK_API bk_status bk_dataset_write_csv(const bk_dataset* d, const char* path);
BK_API void bk_dataset_free(bk_dataset* d);

/* Draws one sample from the configured scenario and seed. */
BK_API bk_status bk_simulate(const bk_config* cfg, bk_dataset** out);

/* Sieve MLE with the configured orders, grid, optimizer and bounds. */
BK_API bk_status bk_fit_run(const bk_config* cfg, const bk_dataset* d, bk_fit** out);
/* Reads a fit.json written by bk_fit_write_json or the fit command. */
BK_API bk_status bk_fit_load(const char* path, bk_fit** out);
BK_API double bk_fit_loglik(const bk_fit* f);
BK_API int bk_fit_converged(const bk_fit* f);
BK_API bk_status bk_fit_eval_g(const bk_fit* f, double x_star, double* out);
BK_API bk_status bk_fit_eval_h(const bk_fit* f, double x_star, double* out);
BK_API bk_status bk_fit_eval_density(const bk_fit* f, bk_density which, double v, double* out);
/* Mean log conditional density of d under the fitted parameters, on the
 * quadrature grid stored with the fit. */
BK_API bk_status bk_fit_log_likelihood(const bk_fit* f, const bk_dataset* d, double* out);
BK_API bk_status bk_fit_write_json(const bk_fit* f, const char* path);
BK_API void bk_fit_free(bk_fit* f);

/* Subcommands. Each writes its files into out_dir, creating it if needed. */
BK_API bk_status bk_cmd_simulate(const bk_config* cfg, const char* out_dir);
BK_API bk_status bk_cmd_fit(const bk_config* cfg, const char* input_csv, const char* out_dir);
BK_API bk_status bk_cmd_naive(const bk_config* cfg, const char* input_csv, const char* out_dir);
BK_API bk_status bk_cmd_select(const bk_config* cfg, const char* input_csv, const char* out_dir);
BK_API bk_status bk_cmd_replicate(const bk_config* cfg, const char* out_dir);
/* BK_ERR_NUMERICAL when recovery misses its tolerance; diagnostics.json is
 * written either way. */
BK_API bk_status bk_cmd_spectral_check(const bk_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
