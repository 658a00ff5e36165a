#ifndef VORTEXBC_H
#define VORTEXBC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VbcSolver {
  VBC_SOLVER_STOKES = 0,
  VBC_SOLVER_OSEEN = 1,
  VBC_SOLVER_HELMHOLTZ = 2,
  VBC_SOLVER_CONTROL = 3,
  VBC_SOLVER_MAP = 4,
  VBC_SOLVER_VERIFY = 5,
} VbcSolver;

typedef enum VbcStatus {
  VBC_STATUS_OK = 0,
  VBC_STATUS_NULL_POINTER = 1,
  VBC_STATUS_INVALID_ARGUMENT = 2,
  VBC_STATUS_DOMAIN = 3,
  VBC_STATUS_GRID = 4,
  VBC_STATUS_MISCONFIGURED = 5,
  VBC_STATUS_NON_CONVERGENCE = 6,
  VBC_STATUS_PARSE = 7,
  VBC_STATUS_VALIDATION = 8,
  VBC_STATUS_IO = 9,
  VBC_STATUS_PANIC = 10,
} VbcStatus;

// Opaque in-memory run result.
typedef struct VbcRun VbcRun;

// Opaque validated scenario.
typedef struct VbcScenario VbcScenario;

// Opaque transform bound to a scenario's grids.
typedef struct VbcTransform VbcTransform;

// Scalar diagnostics of one emission time.
typedef struct VbcRecord {
  double t;
  // Largest `|moment residual|` over `k = 0..=N`.
  double max_manifold_residual;
  // Largest `|Robin residual|` over `k = 0..=N`.
  double max_robin_residual;
  double circulation;
  double boundary_velocity_norm;
} VbcRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated
// to `len`). Returns the full message length excluding the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t vbc_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *vbc_version(void);

// `J_k(x)`.
//
// # Safety
// `result` must be a valid pointer.
enum VbcStatus vbc_bessel_j(int32_t k, double x, double *result);

// `Y_k(x)`, `x > 0`.
//
// # Safety
// `result` must be a valid pointer.
enum VbcStatus vbc_bessel_y(int32_t k, double x, double *result);

// Normalized kernel `R_{k,l}(lambda, r)` for a disc of radius `r0`.
//
// # Safety
// `result` must be a valid pointer.
enum VbcStatus vbc_kernel_r(int32_t k,
                            int32_t l,
                            double lambda,
                            double r,
                            double r0,
                            double *result);

// Boundary forcing kernel `rho_k(lambda)`.
//
// # Safety
// `result` must be a valid pointer.
enum VbcStatus vbc_forcing_kernel_rho(int32_t k, double lambda, double r0, double *result);

// Reads and validates a scenario file.
//
// # Safety
// `path` must be a NUL-terminated string and `scenario` a valid pointer.
enum VbcStatus vbc_scenario_load(const char *path, struct VbcScenario **scenario);

// Parses and validates scenario TOML text.
//
// # Safety
// `toml` must be a NUL-terminated string and `scenario` a valid pointer.
enum VbcStatus vbc_scenario_parse(const char *toml, struct VbcScenario **scenario);

// Mode cutoff `N` of the scenario, or 0 for a null handle.
//
// # Safety
// `scenario` must be null or a live handle.
size_t vbc_scenario_modes(const struct VbcScenario *scenario);

// # Safety
// `scenario` must be null or a handle not yet freed.
void vbc_scenario_free(struct VbcScenario *scenario);

// Builds the grids, transform and initial state of a scenario.
//
// # Safety
// `scenario` must be a live handle and `transform` a valid pointer.
enum VbcStatus vbc_transform_new(const struct VbcScenario *scenario,
                                 struct VbcTransform **transform);

// # Safety
// `transform` must be null or a handle not yet freed.
void vbc_transform_free(struct VbcTransform *transform);

// Number of radial nodes, or 0 for a null handle.
//
// # Safety
// `transform` must be null or a live handle.
size_t vbc_transform_radial_len(const struct VbcTransform *transform);

// Number of spectral nodes, or 0 for a null handle.
//
// # Safety
// `transform` must be null or a live handle.
size_t vbc_transform_spectral_len(const struct VbcTransform *transform);

// Copies the radial nodes into `nodes[0..len]`.
//
// # Safety
// `transform` must be a live handle and `nodes` must hold `len` doubles.
enum VbcStatus vbc_transform_radial_nodes(const struct VbcTransform *transform,
                                          double *nodes,
                                          size_t len);

// Copies the spectral nodes `lambda_j` into `nodes[0..len]`.
//
// # Safety
// `transform` must be a live handle and `nodes` must hold `len` doubles.
enum VbcStatus vbc_transform_spectral_nodes(const struct VbcTransform *transform,
                                            double *nodes,
                                            size_t len);

// Forward transform `W_{k,|k|-1}` of radial values sampled at the radial nodes.
//
// # Safety
// `values` must hold `2 radial_len` doubles and `spectrum` `2 spectral_len` doubles.
enum VbcStatus vbc_transform_forward(const struct VbcTransform *transform,
                                     int32_t k,
                                     const double *values,
                                     size_t radial_len,
                                     double *spectrum,
                                     size_t spectral_len);

// Inverse transform of a spectrum sampled at the spectral nodes.
//
// # Safety
// `spectrum` must hold `2 spectral_len` doubles and `values` `2 radial_len` doubles.
enum VbcStatus vbc_transform_inverse(const struct VbcTransform *transform,
                                     int32_t k,
                                     const double *spectrum,
                                     size_t spectral_len,
                                     double *values,
                                     size_t radial_len);

// Runs `solver` on the scenario in memory.
//
// # Safety
// `scenario` must be a live handle and `run` a valid pointer.
enum VbcStatus vbc_run_execute(const struct VbcScenario *scenario,
                               enum VbcSolver solver,
                               struct VbcRun **run);

// Writes the run's CSV and JSON artifacts into `dir`.
//
// # Safety
// `run` must be a live handle and `dir` a NUL-terminated string.
enum VbcStatus vbc_run_write(const struct VbcRun *run, const char *dir);

// Number of emission records, or 0 for a null handle.
//
// # Safety
// `run` must be null or a live handle.
size_t vbc_run_record_count(const struct VbcRun *run);

// Summary of record `index`.
//
// # Safety
// `run` must be a live handle and `record` a valid pointer.
enum VbcStatus vbc_run_record(const struct VbcRun *run, size_t index, struct VbcRecord *record);

// Whether a `verify` run passed every check; false for other runs.
//
// # Safety
// `run` must be null or a live handle.
bool vbc_run_verify_passed(const struct VbcRun *run);

// # Safety
// `run` must be null or a handle not yet freed.
void vbc_run_free(struct VbcRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VORTEXBC_H */
