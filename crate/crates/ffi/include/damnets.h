#ifndef DAMNETS_H
#define DAMNETS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum DmStatus {
  DM_STATUS_OK = 0,
  DM_STATUS_NULL_POINTER = 1,
  DM_STATUS_INVALID_ARGUMENT = 2,
  DM_STATUS_OUT_OF_RANGE = 3,
  DM_STATUS_IO = 4,
  DM_STATUS_PARSE = 5,
  DM_STATUS_MODEL = 6,
  DM_STATUS_PANIC = 7,
} DmStatus;

// A list of network time series.
typedef struct DmDataset DmDataset;

// A trained transition model read from a checkpoint.
typedef struct DmModel DmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the same thread.
const char *dm_last_error(void);

// Library version as a static NUL-terminated string.
const char *dm_version(void);

// Reads a JSON Lines dataset.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum DmStatus dm_dataset_load(const char *path, struct DmDataset **out);

// Writes a dataset as JSON Lines.
//
// # Safety
// `ds` must be a live handle and `path` a NUL-terminated string.
enum DmStatus dm_dataset_save(const struct DmDataset *ds, const char *path);

// Generates `count` preferential-attachment series on `n` nodes with `m` edges per arrival.
//
// # Safety
// `out` must be a writable pointer.
enum DmStatus dm_generate_ba(size_t n,
                             size_t m,
                             size_t count,
                             uint64_t seed,
                             struct DmDataset **out);

// Generates `count` bipartite concentration series with `per_side` nodes on each side.
//
// # Safety
// `out` must be a writable pointer.
enum DmStatus dm_generate_bipartite(size_t per_side,
                                    double p,
                                    double p_con,
                                    size_t steps,
                                    size_t count,
                                    uint64_t seed,
                                    struct DmDataset **out);

// Generates `count` community decay series. `sizes` holds `num_communities` entries and
// `decay` indexes the community whose internal edges are rewired outward.
//
// # Safety
// `sizes` must point to `num_communities` readable values and `out` must be writable.
enum DmStatus dm_generate_community(const size_t *sizes,
                                    size_t num_communities,
                                    double p_int,
                                    double p_ext,
                                    size_t decay,
                                    double f_dec,
                                    size_t steps,
                                    size_t count,
                                    uint64_t seed,
                                    struct DmDataset **out);

// Releases a dataset. Null is ignored.
//
// # Safety
// `ds` must be null or a handle not yet freed.
void dm_dataset_free(struct DmDataset *ds);

// Number of series in the dataset.
//
// # Safety
// `ds` must be a live handle and `out` writable.
enum DmStatus dm_dataset_len(const struct DmDataset *ds, size_t *out);

// Node count and number of snapshots (`T + 1`) of one series.
//
// # Safety
// `ds` must be a live handle; `n` and `num_graphs` writable.
enum DmStatus dm_series_shape(const struct DmDataset *ds,
                              size_t series,
                              size_t *n,
                              size_t *num_graphs);

// Copies the edges of snapshot `t` as `(i, j)` pairs with `i < j` into `buf`, which holds
// room for `capacity` pairs (`2 * capacity` values). `count` receives the edge count; if it
// exceeds `capacity` nothing is copied and `DM_STATUS_OUT_OF_RANGE` is returned, so a call
// with `capacity = 0` queries the size.
//
// # Safety
// `ds` must be a live handle, `buf` must hold `2 * capacity` writable values (or be null when
// `capacity` is 0) and `count` must be writable.
enum DmStatus dm_series_edges(const struct DmDataset *ds,
                              size_t series,
                              size_t t,
                              uint32_t *buf,
                              size_t capacity,
                              size_t *count);

// Reads a checkpoint written by `damnets train`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum DmStatus dm_model_load(const char *path, struct DmModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void dm_model_free(struct DmModel *model);

// Node count the model was trained for.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum DmStatus dm_model_n(const struct DmModel *model, size_t *out);

// Samples `per_series` trajectories of `steps` transitions from the first snapshot of every
// series in `init`. Results are ordered by initial series, then by sample.
//
// # Safety
// `model` and `init` must be live handles and `out` writable.
enum DmStatus dm_model_sample(const struct DmModel *model,
                              const struct DmDataset *init,
                              size_t steps,
                              size_t per_series,
                              uint64_t seed,
                              struct DmDataset **out);

// Time-summed MMD between two datasets for one statistic, named as on the command line
// (`degree`, `clustering`, `spectral`, `transitivity`, `assortativity`, `closeness`,
// `spectral_bipartivity`).
//
// # Safety
// `test` and `samples` must be live handles, `stat` a NUL-terminated string, `out` writable.
enum DmStatus dm_mmd_bar(const struct DmDataset *test,
                         const struct DmDataset *samples,
                         const char *stat,
                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DAMNETS_H */
