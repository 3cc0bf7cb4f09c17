#ifndef IPS_BENCH_H
#define IPS_BENCH_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Transform codes for [`ips_weighted_combine`].
 */
#define IPS_TRANSFORM_IDENTITY 0

#define IPS_TRANSFORM_SQUARE 1

#define IPS_TRANSFORM_ONE_MINUS 2

/**
 * Result codes. `IPS_OK` is zero; everything else is an error.
 */
typedef enum IpsStatus {
  IPS_OK = 0,
  IPS_ERR_NULL_POINTER = 1,
  IPS_ERR_INVALID_ARGUMENT = 2,
  IPS_ERR_IO = 3,
  IPS_ERR_PARSE = 4,
  IPS_ERR_DIMENSION = 5,
  IPS_ERR_RANGE = 6,
  IPS_ERR_UNSUPPORTED = 7,
  IPS_ERR_NORMALIZATION = 8,
  IPS_ERR_BUFFER_TOO_SMALL = 9,
  IPS_ERR_PANIC = 10,
} IpsStatus;

/**
 * Opaque dataset handle.
 */
typedef struct IpsDataset IpsDataset;

typedef struct IpsPosition {
  double x;
  double y;
  double z;
  int32_t floor;
  /**
   * Non-zero when `floor` is meaningful.
   */
  int32_t has_floor;
} IpsPosition;

typedef struct IpsTrialSummary {
  double mean_error;
  double median_error;
  double p75_error;
  double elapsed_seconds;
  /**
   * Negative when the dataset has no floor labels.
   */
  double floor_hit_rate;
  /**
   * 1.0 for uncompressed methods.
   */
  double cr;
} IpsTrialSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Owned by the
 * library.
 */
const char *ips_last_error(void);

/**
 * Library version as a static string.
 */
const char *ips_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void ips_string_free(char *s);

/**
 * Loads a train/test CSV pair.
 */
enum IpsStatus ips_dataset_load(const char *train_path,
                                const char *test_path,
                                struct IpsDataset **out);

/**
 * Generates a synthetic dataset. `config_json` may be null for defaults;
 * otherwise it is a JSON object with any synthetic config fields.
 */
enum IpsStatus ips_dataset_generate(const char *config_json, struct IpsDataset **out);

/**
 * Releases a dataset handle. Null is ignored.
 */
void ips_dataset_free(struct IpsDataset *ds);

/**
 * Number of APs, or 0 for a null handle.
 */
size_t ips_dataset_ap_count(const struct IpsDataset *ds);

size_t ips_dataset_train_len(const struct IpsDataset *ds);

size_t ips_dataset_test_len(const struct IpsDataset *ds);

/**
 * Copies test sample `index`'s RSS vector into `rss_out` (capacity `cap`)
 * and its true position into `pos_out` (either may be null).
 */
enum IpsStatus ips_dataset_test_sample(const struct IpsDataset *ds,
                                       size_t index,
                                       double *rss_out,
                                       size_t cap,
                                       struct IpsPosition *pos_out);

/**
 * k-NN estimate of one fingerprint against the dataset's radio map.
 * `distance` and `representation` are names such as `"sorensen"` and
 * `"positive"`; null selects `cityblock` / `positive`.
 */
enum IpsStatus ips_knn_estimate(const struct IpsDataset *ds,
                                const double *rss,
                                size_t len,
                                size_t k,
                                const char *distance,
                                const char *representation,
                                struct IpsPosition *out);

/**
 * Evaluates a method given as JSON (same schema as an experiment config
 * entry) over the dataset's test set.
 */
enum IpsStatus ips_evaluate(const struct IpsDataset *ds,
                            const char *method_json,
                            uint32_t trial_index,
                            struct IpsTrialSummary *out);

/**
 * Mean of `n` trial values.
 */
enum IpsStatus ips_aggregate_trials(const double *values, size_t n, double *out);

enum IpsStatus ips_normalize_to_baseline(double method_mean, double baseline_mean, double *out);

/**
 * Mean and sample standard deviation of per-scenario normalized values.
 */
enum IpsStatus ips_aggregate_scenarios(const double *values,
                                       size_t n,
                                       double *mean_out,
                                       double *std_out);

/**
 * `Σ weights[i] · t_i(values[i])` with `transforms[i]` one of the
 * `IPS_TRANSFORM_*` codes (null means identity for all).
 */
enum IpsStatus ips_weighted_combine(const double *values,
                                    const double *weights,
                                    const int32_t *transforms,
                                    size_t n,
                                    double *out);

/**
 * `original_bits / ceil(log2 k)`.
 */
enum IpsStatus ips_akm_compression_ratio(size_t k, uint32_t original_bits, double *out);

/**
 * Optimal 1-D clustering of `values` into at most `k` centroids, written
 * ascending to `centroids_out` (capacity `cap`); `len_out` receives the
 * count actually produced.
 */
enum IpsStatus ips_akm_stage1(const double *values,
                              size_t n,
                              size_t k,
                              double *centroids_out,
                              size_t cap,
                              size_t *len_out);

enum IpsStatus ips_gmms_color_score(double v, double *out);

enum IpsStatus ips_gmms_shape_aspect(double v, double *out);

/**
 * Renders a GMMS plot. `color_values` and `shape_values` are row-major
 * `n_methods × n_scenarios` arrays. The SVG text is returned in
 * `svg_out` and must be released with [`ips_string_free`].
 */
enum IpsStatus ips_gmms_render(const char *const *methods,
                               size_t n_methods,
                               const char *const *scenarios,
                               size_t n_scenarios,
                               const double *color_values,
                               const double *shape_values,
                               uint32_t cell_px,
                               char **svg_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPS_BENCH_H */
