/* Copyright 2026 The flipnerf Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the flipnerf toolkit. Every call returns an fn_status; on
 * failure fn_last_error() describes the problem for the calling thread. */
#ifndef FLIPNERF_FLIPNERF_H_
#define FLIPNERF_FLIPNERF_H_

#include <stdint.h>

#if defined(FLIPNERF_BUILDING_LIBRARY)
#define FN_API __attribute__((visibility("default")))
#else
#define FN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fn_status {
  FN_OK = 0,
  FN_USAGE_ERROR = 1,
  FN_DATA_ERROR = 2,
  FN_NUMERIC_ERROR = 3,
  FN_INTERNAL_ERROR = 4
} fn_status;

typedef enum fn_split { FN_SPLIT_TRAIN = 0, FN_SPLIT_TEST = 1, FN_SPLIT_UPPER = 2 } fn_split;

typedef struct fn_dataset fn_dataset;
typedef struct fn_run fn_run;

/* Message of the last failed call on this thread; empty after a success. */
FN_API const char* fn_last_error(void);
/* Iteration of the last numeric failure on this thread, -1 if none. */
FN_API int fn_last_error_iteration(void);

FN_API fn_status fn_synth(const char* scene, const char* out_dir, int size, uint64_t seed);

FN_API fn_status fn_dataset_open(const char* dir, fn_dataset** out);
FN_API void fn_dataset_close(fn_dataset* ds);
FN_API fn_status fn_dataset_view_count(const fn_dataset* ds, fn_split split, int config_n, int* count);

/* Writes config_1.json .. config_8.json, each a JSON list of 1-based ring indices. */
FN_API fn_status fn_make_configs(const fn_dataset* ds, const char* out_dir);

/* plane: "auto", "geometric", "x=0", "y=0", "z=0" or "a,b,c,d". */
FN_API fn_status fn_flip_poses(const fn_dataset* ds, int config_n, const char* plane, const char* out_file);

typedef struct fn_train_options {
  int config_n;
  const char* mode; /* baseline | baseline-u | flip | flip-u | upper */
  const char* plane;
  int iters;
  int warmup;
  uint64_t seed;
  int grid;
  int rays;
  int samples;
  double beta_min_sq;
  double reg_w;
  double lr_field;
  double lr_pose;
  double pose_noise_deg;
  double init_density_raw;
  int variance_linear; /* 0: sum w^2 var, 1: sum w var */
  int inputs_photometric; /* flip-u: keep plain squared error on input rays after warmup */
} fn_train_options;

FN_API void fn_train_options_init(fn_train_options* opts);

/* Called after every iteration with the total batch loss; may be NULL. */
typedef void (*fn_progress_fn)(int iteration, double loss, void* user);

FN_API fn_status fn_train(const fn_dataset* ds, const fn_train_options* opts, const char* out_dir,
                          fn_progress_fn progress, void* user);

FN_API fn_status fn_run_open(const char* run_dir, fn_run** out);
FN_API void fn_run_close(fn_run* run);
FN_API fn_status fn_run_observation_count(const fn_run* run, int* count);

typedef struct fn_eval_summary {
  int views;
  double mean_psnr_db;
  double mean_ssim;
} fn_eval_summary;

FN_API fn_status fn_eval(fn_run* run, const fn_dataset* ds, fn_split split, const char* out_csv,
                         fn_eval_summary* summary);

/* variance_png may be NULL. */
FN_API fn_status fn_render(fn_run* run, int pose_index, const char* rgb_png, const char* variance_png);

#ifdef __cplusplus
}
#endif

#endif /* FLIPNERF_FLIPNERF_H_ */
