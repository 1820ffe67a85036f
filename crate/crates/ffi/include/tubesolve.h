#ifndef TUBESOLVE_H
#define TUBESOLVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdbool.h>

/*
 Result codes shared by every function of the C API.
 */
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_UTF8 = 2,
  TS_STATUS_INVALID_INPUT = 3,
  TS_STATUS_REGRESSIVITY = 4,
  TS_STATUS_BUFFER_TOO_SMALL = 5,
  /*
   The solver stopped without meeting its tolerances; the solution handle is still produced.
   */
  TS_STATUS_NOT_CONVERGED = 6,
  /*
   At least one tube condition failed; the report is still written.
   */
  TS_STATUS_CERTIFICATE_FAILED = 7,
  TS_STATUS_PANIC = 8,
} TsStatus;

/*
 A validated problem, tube and solver configuration.
 */
typedef struct TsRun TsRun;

/*
 A realized time scale.
 */
typedef struct TsScale TsScale;

/*
 Solver output: the trajectory and its report.
 */
typedef struct TsSolution TsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to fit) and returns the full message length in bytes.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t ts_last_error_message(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *ts_version(void);

/*
 Builds a time scale from its JSON description
 (`{"components":[{"point":x} | {"interval":{"lo":..,"hi":..,"step":..}}]}`).

 # Safety
 `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum TsStatus ts_scale_from_json(const char *json, struct TsScale **out);

/*
 Builds a time scale from `len` strictly increasing points.

 # Safety
 `points` must be valid for `len` doubles; `out` must be a valid pointer.
 */
enum TsStatus ts_scale_from_points(const double *points, size_t len, struct TsScale **out);

/*
 Number of grid points, 0 for a null handle.

 # Safety
 `scale` must be null or a live handle.
 */
size_t ts_scale_len(const struct TsScale *scale);

/*
 Copies the grid points into `out` (capacity `len`).

 # Safety
 `scale` must be a live handle; `out` valid for `len` doubles.
 */
enum TsStatus ts_scale_points(const struct TsScale *scale, double *out, size_t len);

/*
 # Safety
 `scale` must be null or a handle not yet freed.
 */
void ts_scale_free(struct TsScale *scale);

/*
 Nabla exponential `e_eps(t_i, t_{t0_index})` for every grid point.

 # Safety
 `scale` must be a live handle; `out` valid for `len` doubles.
 */
enum TsStatus ts_nabla_exp(const struct TsScale *scale,
                           double eps,
                           size_t t0_index,
                           double *out,
                           size_t len);

/*
 Periodic solution of `x^nabla - x = g`. `g` and `out` are row-major
 `N x dim` arrays (`N` grid points).

 # Safety
 `scale` must be a live handle; `g` valid for `N*dim` doubles, `out` for `len`.
 */
enum TsStatus ts_solve_linear(const struct TsScale *scale,
                              size_t dim,
                              const double *g,
                              double *out,
                              size_t len);

/*
 Validates a run configuration (the JSON accepted by `tubesolve solve`).

 # Safety
 `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum TsStatus ts_run_from_json(const char *json, struct TsRun **out);

/*
 Problem dimension, 0 for a null handle.

 # Safety
 `run` must be null or a live handle.
 */
size_t ts_run_dim(const struct TsRun *run);

/*
 Number of grid points of the run's time scale, 0 for a null handle.

 # Safety
 `run` must be null or a live handle.
 */
size_t ts_run_len(const struct TsRun *run);

/*
 # Safety
 `run` must be null or a handle not yet freed.
 */
void ts_run_free(struct TsRun *run);

/*
 Runs the solver. `*out` receives a solution handle on `TS_STATUS_OK` and
 on `TS_STATUS_NOT_CONVERGED`.

 # Safety
 `run` must be a live handle; `out` a valid pointer.
 */
enum TsStatus ts_run_solve(const struct TsRun *run, struct TsSolution **out);

/*
 Checks the tube conditions and writes the JSON certificate into `buf`.
 `n_dirs = 0` and `tol <= 0` select the defaults.

 # Safety
 `run` must be a live handle; `buf` valid for `len` bytes; `written` null or valid.
 */
enum TsStatus ts_run_verify_tube(const struct TsRun *run,
                                 size_t n_dirs,
                                 double tol,
                                 char *buf,
                                 size_t len,
                                 size_t *written);

/*
 # Safety
 `sol` must be null or a live handle.
 */
bool ts_solution_converged(const struct TsSolution *sol);

/*
 Copies the trajectory (row-major `N x dim`) into `out`.

 # Safety
 `sol` must be a live handle; `out` valid for `len` doubles.
 */
enum TsStatus ts_solution_values(const struct TsSolution *sol, double *out, size_t len);

/*
 Writes the solver report as JSON into `buf`.

 # Safety
 `sol` must be a live handle; `buf` valid for `len` bytes; `written` null or valid.
 */
enum TsStatus ts_solution_report_json(const struct TsSolution *sol,
                                      bool full_history,
                                      char *buf,
                                      size_t len,
                                      size_t *written);

/*
 # Safety
 `sol` must be null or a handle not yet freed.
 */
void ts_solution_free(struct TsSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUBESOLVE_H */
