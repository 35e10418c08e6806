#ifndef ROMLAB_ROMLAB_H
#define ROMLAB_ROMLAB_H

/* C interface of the romlab library.
 *
 * Every function returns a romlab_status; on failure the message of the last
 * error on the calling thread is available from romlab_last_error(). Objects
 * are opaque handles released with the matching *_free function (NULL is
 * accepted). Matrices cross the boundary column-major as double arrays. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ROMLAB_API __declspec(dllexport)
#else
#define ROMLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum romlab_status {
  ROMLAB_OK = 0,
  ROMLAB_INVALID_ARGUMENT = 1,
  ROMLAB_DIMENSION_MISMATCH = 2,
  ROMLAB_NON_CONVERGENCE = 3,
  ROMLAB_SINGULAR_MATRIX = 4,
  ROMLAB_IO = 5,
  ROMLAB_NUMERIC = 6,
  ROMLAB_INTERNAL = 7
} romlab_status;

typedef struct romlab_config romlab_config;
typedef struct romlab_model romlab_model;
typedef struct romlab_trajectory romlab_trajectory;
typedef struct romlab_basis romlab_basis;
typedef struct romlab_eim romlab_eim;
typedef struct romlab_surrogate romlab_surrogate;

ROMLAB_API const char* romlab_version(void);
/* Message of the last failed call on this thread ("" if none). */
ROMLAB_API const char* romlab_last_error(void);
ROMLAB_API const char* romlab_status_string(romlab_status s);

/* ---- experiment configuration ---- */
ROMLAB_API romlab_status romlab_config_load(const char* path, romlab_config** out);
ROMLAB_API romlab_status romlab_config_parse(const char* json_text, romlab_config** out);
ROMLAB_API void romlab_config_free(romlab_config* cfg);
ROMLAB_API romlab_status romlab_config_set_output(romlab_config* cfg, const char* dir);
ROMLAB_API romlab_status romlab_config_set_seed(romlab_config* cfg, uint64_t seed);
ROMLAB_API romlab_status romlab_config_set_threads(romlab_config* cfg, int threads);
ROMLAB_API romlab_status romlab_config_set_deterministic(romlab_config* cfg, int on);
/* Writes the output directory / 16-hex-digit config hash into buf. */
ROMLAB_API romlab_status romlab_config_output(const romlab_config* cfg, char* buf, size_t len);
ROMLAB_API romlab_status romlab_config_hash(const romlab_config* cfg, char* buf, size_t len);

/* ---- pipeline stages ----
 * stage: "snapshots", "eim", "greedy", "rom-simulate", "train-hybrid",
 * "train-nonintrusive" or "benchmark". */
ROMLAB_API romlab_status romlab_run_stage(const romlab_config* cfg, const char* stage);
/* Predicts with a surrogate bundle and writes a trajectory container. */
ROMLAB_API romlab_status romlab_predict(const char* bundle_dir, const double* mu, size_t p,
                                        const char* out_path);
/* Merges run manifests below runs_dir into runs_dir/summary.csv; the path of
 * the summary is written into buf. */
ROMLAB_API romlab_status romlab_report(const char* runs_dir, char* buf, size_t len);

/* ---- full-order model ---- */
ROMLAB_API romlab_status romlab_model_create(const romlab_config* cfg, romlab_model** out);
ROMLAB_API void romlab_model_free(romlab_model* model);
ROMLAB_API romlab_status romlab_model_dim(const romlab_model* model, size_t* n);
ROMLAB_API romlab_status romlab_model_param_dim(const romlab_model* model, size_t* p);
ROMLAB_API romlab_status romlab_fom_simulate(const romlab_model* model, const double* mu, size_t p,
                                             romlab_trajectory** out);

/* ---- trajectories (n x n_t, column i is the state at t_i) ---- */
ROMLAB_API romlab_status romlab_trajectory_load(const char* path, romlab_trajectory** out);
ROMLAB_API romlab_status romlab_trajectory_save(const romlab_trajectory* traj, const char* path);
ROMLAB_API romlab_status romlab_trajectory_shape(const romlab_trajectory* traj, size_t* rows,
                                                 size_t* cols);
ROMLAB_API romlab_status romlab_trajectory_data(const romlab_trajectory* traj, const double** data);
ROMLAB_API void romlab_trajectory_free(romlab_trajectory* traj);

/* ---- POD basis ----
 * rank > 0 fixes the size; otherwise tol selects it by the relative tail of
 * the singular values. */
ROMLAB_API romlab_status romlab_pod_basis(const double* X, size_t rows, size_t cols, size_t rank,
                                          double tol, romlab_basis** out);
ROMLAB_API romlab_status romlab_basis_load(const char* path, romlab_basis** out);
ROMLAB_API romlab_status romlab_basis_save(const romlab_basis* basis, const char* path);
ROMLAB_API romlab_status romlab_basis_shape(const romlab_basis* basis, size_t* rows, size_t* cols);
ROMLAB_API romlab_status romlab_basis_data(const romlab_basis* basis, const double** data);
ROMLAB_API romlab_status romlab_basis_singular_values(const romlab_basis* basis,
                                                      const double** data, size_t* len);
ROMLAB_API void romlab_basis_free(romlab_basis* basis);

/* ---- empirical interpolation ----
 * max_size == 0 means unbounded. */
ROMLAB_API romlab_status romlab_eim_build(const double* F, size_t rows, size_t cols, double tol,
                                          size_t max_size, romlab_eim** out);
ROMLAB_API romlab_status romlab_eim_size(const romlab_eim* eim, size_t* m);
ROMLAB_API romlab_status romlab_eim_indices(const romlab_eim* eim, size_t* out, size_t len);
/* Interpolant U (P^T U)^{-1} P^T f of a full vector f (length n). */
ROMLAB_API romlab_status romlab_eim_interpolate(const romlab_eim* eim, const double* f, size_t n,
                                                double* out);
ROMLAB_API void romlab_eim_free(romlab_eim* eim);

/* ---- trained surrogates ---- */
ROMLAB_API romlab_status romlab_surrogate_load(const char* bundle_dir, romlab_surrogate** out);
ROMLAB_API romlab_status romlab_surrogate_predict(const romlab_surrogate* s, const double* mu,
                                                  size_t p, romlab_trajectory** out);
ROMLAB_API void romlab_surrogate_free(romlab_surrogate* s);

/* sum_i ||ref_i - pred_i|| / sum_i ||ref_i|| over the columns. */
ROMLAB_API romlab_status romlab_relative_error(const double* ref, const double* pred, size_t rows,
                                               size_t cols, double* out);

#ifdef __cplusplus
}
#endif

#endif /* ROMLAB_ROMLAB_H */
