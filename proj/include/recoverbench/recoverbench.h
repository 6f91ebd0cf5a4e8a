/*
 * recoverbench C API.
 *
 * Objects are opaque handles created by rb_*_generate / rb_*_read / rb_*_run
 * and released with the matching rb_*_free. Every fallible call returns an
 * rb_status; on failure rb_last_error() describes the problem (the message is
 * per thread and stays valid until the next failing call on that thread).
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with rb_string_free.
 *
 * Options and configurations are passed as UTF-8 JSON text.
 */
#ifndef RECOVERBENCH_H
#define RECOVERBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RB_BUILDING_LIBRARY)
#    define RB_API __declspec(dllexport)
#  else
#    define RB_API __declspec(dllimport)
#  endif
#else
#  define RB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rb_status {
    RB_OK = 0,
    RB_ERR_INVALID_ARGUMENT = 1,
    RB_ERR_VALIDATION = 2,
    RB_ERR_PARSE = 3,
    RB_ERR_IO = 4,
    RB_ERR_RANGE = 5,
    RB_ERR_DEGENERATE = 6,
    RB_ERR_NUMERIC = 7,
    RB_ERR_INTERNAL = 8
} rb_status;

typedef struct rb_dataset rb_dataset;
typedef struct rb_truth rb_truth;
typedef struct rb_grid rb_grid;

RB_API const char* rb_version(void);
RB_API const char* rb_status_name(rb_status status);
RB_API const char* rb_last_error(void);
RB_API void rb_string_free(char* s);

/* ---- datasets (EPD v1 directories: meta.json + data.f64) ---------------- */

/* noise_spec_json may be NULL or "{}" for the defaults. Keys: n_trials_a,
 * n_trials_b, n_channels, n_time, sampling_rate, time_start_ms,
 * ar_coefficient, spatial_correlation, trial_jitter_sd, seed. */
RB_API rb_status rb_dataset_generate(const char* noise_spec_json, rb_dataset** out);
RB_API rb_status rb_dataset_read(const char* dir, rb_dataset** out);
RB_API rb_status rb_dataset_write(const rb_dataset* dataset, const char* dir);
RB_API void rb_dataset_free(rb_dataset* dataset);

RB_API rb_status rb_dataset_shape(const rb_dataset* dataset, size_t* n_trials, size_t* n_channels,
                                  size_t* n_time);
/* Borrowed pointer to the [trial][channel][time] payload; valid while the handle lives. */
RB_API rb_status rb_dataset_data(const rb_dataset* dataset, const double** data);
/* Writes n_trials label characters ('A' or 'B') into out, which must hold capacity >= n_trials. */
RB_API rb_status rb_dataset_labels(const rb_dataset* dataset, char* out, size_t capacity);

/* ---- signal injection -------------------------------------------------- */

/* Keys: snr_in, n_signal_channels, window_ms [start, end], gaussian_fwhm_ms,
 * channel_order_seed. */
RB_API rb_status rb_inject(const rb_dataset* dataset, const char* injection_spec_json, rb_dataset** out,
                           rb_truth** truth);
RB_API rb_status rb_truth_read(const char* dir, rb_truth** out);
RB_API rb_status rb_truth_write(const rb_truth* truth, const char* dir);
RB_API void rb_truth_free(rb_truth* truth);
/* Copies up to capacity signal-channel indices; *count receives the total. */
RB_API rb_status rb_truth_signal_channels(const rb_truth* truth, size_t* out, size_t capacity, size_t* count);

/* ---- analyses ---------------------------------------------------------- */

/* Per-channel permutation test with FDR. truth and csv_path may be NULL.
 * Options: window_ms, n_perm (5000), seed, q (0.05),
 * statistic ("median_difference" | "median_pairwise_difference").
 * *result_json holds stat, p_values, significant and, with truth, tp/fp rates. */
RB_API rb_status rb_univariate(const rb_dataset* dataset, const rb_truth* truth, const char* options_json,
                               const char* csv_path, char** result_json);

/* Nested cross-validated SVM or MKL. truth may be NULL.
 * Options: method ("svm" | "mkl"), window_ms, C_grid, k_outer, k_inner, seed,
 * n_perm (0), svm {tol}, mkl {d_tol, gap_tol, max_outer}.
 * *report_json holds accuracy, per-fold C / kernel weights / contributions,
 * expected ranking and, with truth, the recovery metrics. */
RB_API rb_status rb_train(const rb_dataset* dataset, const rb_truth* truth, const char* options_json,
                          char** report_json);

/* ---- grid sweeps ------------------------------------------------------- */

/* Runs (or resumes) the sweep described by config_json. output_dir may be
 * NULL to use the config value; threads 0 keeps the config / environment. */
RB_API rb_status rb_grid_run(const char* config_json, const char* output_dir, size_t threads, rb_grid** out);
RB_API rb_status rb_grid_load(const char* results_csv, rb_grid** out);
RB_API void rb_grid_free(rb_grid* grid);
RB_API rb_status rb_grid_row_count(const rb_grid* grid, size_t* rows, size_t* failed_rows);
RB_API rb_status rb_grid_render_heatmap(const rb_grid* grid, const char* metric, const char* method,
                                        const char* svg_path);
RB_API rb_status rb_grid_metric_table(const rb_grid* grid, const char* metric, const char* method, char** csv);
/* as_json != 0 yields JSON, otherwise a plain-text table. *missing_cells (may be NULL)
 * receives the number of grid cells without a row. */
RB_API rb_status rb_grid_summarize(const rb_grid* grid, int as_json, char** text, size_t* missing_cells);

#ifdef __cplusplus
}
#endif

#endif /* RECOVERBENCH_H */
