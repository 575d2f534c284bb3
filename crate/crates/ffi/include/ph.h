#ifndef PH_FFI_H
#define PH_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PH_OK 0

#define PH_ERR_NULL 1

#define PH_ERR_UTF8 2

#define PH_ERR_PARSE 3

#define PH_ERR_VALIDATION 4

#define PH_ERR_DIMENSION 5

#define PH_ERR_SOLVER 6

#define PH_ERR_CONFIG 7

#define PH_ERR_GEOMETRY 8

#define PH_ERR_STEP_REJECTED 9

#define PH_ERR_IO 10

#define PH_ERR_TOPOLOGY 11

#define PH_ERR_RANGE 12

#define PH_ERR_PANIC 13

/**
 * Number of columns in a trajectory row: t, H, H_kin, H_grav, H_surf,
 * port_flux, area, div_residual.
 */
#define PH_RECORD_COLUMNS 8

/**
 * A triangulated domain with boundary labels.
 */
typedef struct PhMesh PhMesh;

/**
 * The output of one scenario run.
 */
typedef struct PhRecord PhRecord;

/**
 * A validated scenario ready to integrate.
 */
typedef struct PhScenario PhScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ph_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t ph_last_error_message(char *buf, size_t len);

/**
 * Reads a mesh file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
int32_t ph_mesh_load(const char *path, struct PhMesh **out);

/**
 * Parses mesh text in the `ph-mesh 1` format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
int32_t ph_mesh_parse(const char *text, struct PhMesh **out);

/**
 * Rectangular tank [0, length] x [-depth, 0] with a free top and walled
 * sides and bottom, `nx` by `ny` cells split into triangles.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t ph_mesh_tank(double length, double depth, size_t nx, size_t ny, struct PhMesh **out);

/**
 * # Safety
 * `mesh` must be NULL or a handle from this library not yet freed.
 */
void ph_mesh_free(struct PhMesh *mesh);

/**
 * Vertex, edge and triangle counts.
 *
 * # Safety
 * `mesh` must be a live handle; the out pointers must be writable.
 */
int32_t ph_mesh_counts(const struct PhMesh *mesh,
                       size_t *n_vertices,
                       size_t *n_edges,
                       size_t *n_triangles);

/**
 * # Safety
 * `mesh` must be a live handle; the out pointers must be writable.
 */
int32_t ph_mesh_betti(const struct PhMesh *mesh, size_t *b0, size_t *b1);

/**
 * Copies vertex coordinates as x0, y0, x1, y1, ... into `xy`, which must
 * hold `2 * n_vertices` doubles (`len` counts doubles).
 *
 * # Safety
 * `mesh` must be a live handle and `xy` must point to `len` writable doubles.
 */
int32_t ph_mesh_vertices(const struct PhMesh *mesh, double *xy, size_t len);

/**
 * Runs a property suite ("forms", "elliptic", "brackets", "dirac",
 * "energetics") and reports how many checks ran and how many failed.
 *
 * # Safety
 * `mesh` must be a live handle, `suite` a NUL-terminated string, and the
 * out pointers writable.
 */
int32_t ph_check(const struct PhMesh *mesh,
                 const char *suite,
                 uint64_t seed,
                 size_t *n_checks,
                 size_t *n_failed);

/**
 * Reads an INI run config (the same format as `ph run`).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
int32_t ph_scenario_load(const char *path, struct PhScenario **out);

/**
 * Overrides time step and end time.
 *
 * # Safety
 * `sc` must be a live handle.
 */
int32_t ph_scenario_set_time(struct PhScenario *sc, double dt, double t_end);

/**
 * # Safety
 * `sc` must be NULL or a handle from this library not yet freed.
 */
void ph_scenario_free(struct PhScenario *sc);

/**
 * Integrates the scenario to its end time.
 *
 * # Safety
 * `sc` must be a live handle; `out` must be writable.
 */
int32_t ph_scenario_run(const struct PhScenario *sc, struct PhRecord **out);

/**
 * # Safety
 * `rec` must be NULL or a handle from this library not yet freed.
 */
void ph_record_free(struct PhRecord *rec);

/**
 * Number of recorded rows.
 *
 * # Safety
 * `rec` must be a live handle; `n_rows` must be writable.
 */
int32_t ph_record_len(const struct PhRecord *rec, size_t *n_rows);

/**
 * Copies row `i` into `row`, which must hold `PH_RECORD_COLUMNS` doubles.
 *
 * # Safety
 * `rec` must be a live handle; `row` must point to `PH_RECORD_COLUMNS`
 * writable doubles.
 */
int32_t ph_record_row(const struct PhRecord *rec, size_t i, double *row);

/**
 * Energy drift, power-balance residual and area drift of a run.
 *
 * # Safety
 * `rec` must be a live handle; the out pointers must be writable.
 */
int32_t ph_record_summary(const struct PhRecord *rec,
                          double *energy_drift,
                          double *power_residual,
                          double *area_drift);

/**
 * Writes `trajectory.csv` and the surface snapshots into `dir`.
 *
 * # Safety
 * `rec` must be a live handle; `dir` a NUL-terminated string.
 */
int32_t ph_record_write(const struct PhRecord *rec, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PH_FFI_H */
