#ifndef MANIFOLDWALK_H
#define MANIFOLDWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Written to unlabeled rows that received no prediction because transfer
 * was gated off.
 */
#define MW_NO_PREDICTION ~0

/**
 * Label value marking an unlabeled target row.
 */
#define MW_UNLABELED -1

typedef enum MwVariant {
  MW_VARIANT_ROWS = 0,
  MW_VARIANT_COLUMNS = 1,
  MW_VARIANT_ROWS_AND_COLUMNS = 2,
} MwVariant;

typedef enum MwStatus {
  MW_STATUS_OK = 0,
  MW_STATUS_INVALID_ARGUMENT = 1,
  MW_STATUS_DIMENSION_MISMATCH = 2,
  MW_STATUS_NUMERICAL = 3,
  MW_STATUS_EMPTY_TRAINING_SET = 4,
  MW_STATUS_DEGENERATE = 5,
  MW_STATUS_NULL_POINTER = 6,
  MW_STATUS_PANIC = 7,
} MwStatus;

typedef enum MwDataset {
  MW_DATASET_SWISS_ROLL = 0,
  MW_DATASET_S_CURVE = 1,
  MW_DATASET_MOONS = 2,
} MwDataset;

typedef enum MwMeasure {
  MW_MEASURE_COSINE = 0,
  MW_MEASURE_RBF = 1,
  MW_MEASURE_PROCRUSTES = 2,
  MW_MEASURE_WASSERSTEIN = 3,
  MW_MEASURE_HAUSDORFF = 4,
} MwMeasure;

/**
 * Opaque point cloud handle.
 */
typedef struct MwPointCloud MwPointCloud;

/**
 * Transfer settings. `t` NaN means the automatic walk parameter; `dt`
 * INFINITY disables the gate.
 */
typedef struct MwTransferOptions {
  size_t k;
  double t;
  double dt;
  enum MwVariant variant;
  bool symmetrize;
  bool joint_scale;
} MwTransferOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *mw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mw_version(void);

struct MwTransferOptions mw_transfer_options_default(void);

/**
 * Copies `n * d` row-major values into a new cloud.
 *
 * # Safety
 * `data` must point to `n * d` readable doubles; `out` must be writable.
 */
enum MwStatus mw_point_cloud_new(const double *data, size_t n, size_t d, struct MwPointCloud **out);

/**
 * Releases a cloud. NULL is ignored.
 *
 * # Safety
 * `cloud` must come from this library and not have been freed.
 */
void mw_point_cloud_free(struct MwPointCloud *cloud);

/**
 * Number of rows, or 0 for NULL.
 *
 * # Safety
 * `cloud` must be NULL or a live handle.
 */
size_t mw_point_cloud_len(const struct MwPointCloud *cloud);

/**
 * Number of columns, or 0 for NULL.
 *
 * # Safety
 * `cloud` must be NULL or a live handle.
 */
size_t mw_point_cloud_dim(const struct MwPointCloud *cloud);

/**
 * Copies the row-major values into `out`, which holds `len` doubles;
 * `len` must equal rows times columns.
 *
 * # Safety
 * `cloud` must be a live handle and `out` must hold `len` doubles.
 */
enum MwStatus mw_point_cloud_copy_data(const struct MwPointCloud *cloud, double *out, size_t len);

/**
 * Generates a labeled synthetic dataset. `classes` is ignored for moons.
 * `labels` receives `n` class ids.
 *
 * # Safety
 * `out_cloud` must be writable and `labels` must hold `n` entries.
 */
enum MwStatus mw_dataset_generate(enum MwDataset kind,
                                  size_t n,
                                  size_t classes,
                                  uint64_t seed,
                                  struct MwPointCloud **out_cloud,
                                  size_t *labels);

/**
 * New cloud with Gaussian noise of level 0-4 added to every entry.
 *
 * # Safety
 * `cloud` must be a live handle and `out` writable.
 */
enum MwStatus mw_add_noise(const struct MwPointCloud *cloud,
                           uint8_t level,
                           uint64_t seed,
                           struct MwPointCloud **out);

/**
 * Manifold distance between the k-NN graphs of two clouds with equal row
 * counts. `t` NaN selects the automatic walk parameter.
 *
 * # Safety
 * `a` and `b` must be live handles and `out_distance` writable.
 */
enum MwStatus mw_manifold_distance(const struct MwPointCloud *a,
                                   const struct MwPointCloud *b,
                                   size_t k,
                                   double t,
                                   enum MwVariant variant_kind,
                                   bool symmetrize,
                                   double *out_distance);

/**
 * One of the conventional point-cloud distances with default parameters.
 *
 * # Safety
 * `a` and `b` must be live handles and `out_distance` writable.
 */
enum MwStatus mw_baseline_distance(enum MwMeasure measure,
                                   const struct MwPointCloud *a,
                                   const struct MwPointCloud *b,
                                   double *out_distance);

/**
 * Gated transfer classification of the unlabeled target rows.
 *
 * `target_labels` holds one entry per target row: a class id, or -1 for
 * unlabeled rows. `source_labels` holds one class id per source row.
 * `predictions` receives one class id per target row (labeled rows keep
 * their label). When the measured distance exceeds `dt` the call still
 * succeeds, `*out_gated` is true and unlabeled rows get
 * `MW_NO_PREDICTION`. `out_distance` and `out_gated` may be NULL.
 *
 * # Safety
 * Handles must be live; each array must hold as many entries as its cloud
 * has rows; `options` may be NULL for defaults.
 */
enum MwStatus mw_transfer_classify(const struct MwPointCloud *target,
                                   const int64_t *target_labels,
                                   const struct MwPointCloud *source,
                                   const size_t *source_labels,
                                   const struct MwTransferOptions *options,
                                   size_t *predictions,
                                   double *out_distance,
                                   bool *out_gated);

/**
 * Plain k-NN over the labeled target rows only; arrays as in
 * `mw_transfer_classify`.
 *
 * # Safety
 * `target` must be live; `target_labels` and `predictions` must hold one
 * entry per row.
 */
enum MwStatus mw_baseline_classify(const struct MwPointCloud *target,
                                   const int64_t *target_labels,
                                   size_t k,
                                   size_t *predictions);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MANIFOLDWALK_H */
