// SPDX-License-Identifier: Apache-2.0
//
// arrayopt - sparse phased-array layout optimization with neural surrogates
// Copyright (C) 2026 The arrayopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

/* C interface to arrayopt.
 *
 * Every fallible call returns an ao_status; on failure ao_last_error() holds a
 * message for the calling thread until its next failing call. Handles are
 * opaque and owned by the caller, who releases them with the matching
 * ao_*_free. Models and datasets are read-only in every call that takes them
 * as const and may be shared between threads.
 *
 * Lengths are in wavelengths. Coordinate buffers are interleaved (y, z).
 */

#ifndef ARRAYOPT_ARRAYOPT_H
#define ARRAYOPT_ARRAYOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(ARRAYOPT_BUILDING_LIBRARY)
#define AO_API __attribute__((visibility("default")))
#else
#define AO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ao_status {
  AO_OK = 0,
  AO_ERR_INVALID_ARGUMENT = 1,
  AO_ERR_IO = 2,
  AO_ERR_DEGENERATE = 3,
  AO_ERR_DIVERGENCE = 4,
  AO_ERR_MISMATCH = 5,
  AO_ERR_SHAPE = 6,
  AO_ERR_INTERNAL = 99
} ao_status;

enum { AO_ARCH_FNN = 1, AO_ARCH_SET_TRANSFORMER = 2 };
enum { AO_MODE_HARD = 0, AO_MODE_PENALTY = 1 };
enum { AO_TERM_MAX_ITERS = 0, AO_TERM_CONSTRAINT_REVERT = 1, AO_TERM_DIVERGENCE = 2 };
enum { AO_MAX_ELEMENTS = 1024 };

typedef struct ao_layout ao_layout;
typedef struct ao_dataset ao_dataset;
typedef struct ao_model ao_model;
typedef struct ao_run_record ao_run_record;
typedef struct ao_run_batch ao_run_batch;

AO_API const char* ao_version(void);
AO_API const char* ao_last_error(void);
AO_API const char* ao_status_name(ao_status status);

/* ---- layouts ---- */

AO_API ao_status ao_layout_create(double aperture_y, double aperture_z, const double* yz, size_t n,
                                  ao_layout** out);
AO_API ao_status ao_layout_load(const char* path, ao_layout** out);
/* meta_json may be NULL. */
AO_API ao_status ao_layout_save(const ao_layout* layout, const char* path, const char* meta_json);
AO_API void ao_layout_free(ao_layout* layout);
AO_API size_t ao_layout_size(const ao_layout* layout);
/* yz receives 2 * size values, aperture 2 values; either may be NULL. */
AO_API ao_status ao_layout_get(const ao_layout* layout, double* yz, double* aperture);
AO_API ao_status ao_layout_min_distance(const ao_layout* layout, double* out);

/* ---- array factor ---- */

typedef struct ao_grid_spec {
  double u_extent;
  int n_samples; /* odd, >= 3 */
  double ml_radius;
} ao_grid_spec;

/* 4*pi extent, 257 samples, main-lobe radius 1.5 * 2*pi / smaller aperture side. */
AO_API ao_status ao_grid_default(double aperture_y, double aperture_z, ao_grid_spec* out);

AO_API ao_status ao_true_cost(const ao_layout* layout, const ao_grid_spec* grid, int p, double* out);

typedef struct ao_axis_metrics {
  int has_first_sll;
  double first_sll_db;
  int has_second_sll;
  double second_sll_db;
  int sll_shortfall; /* fewer than two side lobes on the cut */
  int has_beamwidth;
  double beamwidth_u;
  double beamwidth_deg;
} ao_axis_metrics;

typedef struct ao_metrics {
  size_t n_elements;
  double true_cost;
  int has_min_distance; /* 0 for a single element */
  double min_distance;
  ao_axis_metrics axis[2]; /* [0] = u_y cut, [1] = u_z cut */
} ao_metrics;

/* Computes metrics and, when the paths are non-NULL, writes the u_y and u_z
 * cuts as "u,db" CSV files with one row per grid sample. A pattern without
 * side-lobe energy has no defined cost and yields AO_ERR_DEGENERATE. */
AO_API ao_status ao_evaluate(const ao_layout* layout, const ao_grid_spec* grid, int p, const char* cut_y_csv,
                             const char* cut_z_csv, ao_metrics* out);

/* ---- generation and datasets ---- */

typedef struct ao_gen_config {
  double aperture_y, aperture_z;
  int partition_y, partition_z;
  double period_lo, period_hi;
  double rotation_lo, rotation_hi;
  double offset_periods;
  double seam_min_distance;
  uint64_t seed;
} ao_gen_config;

AO_API ao_status ao_gen_config_default(ao_gen_config* out);

AO_API ao_status ao_dataset_generate(size_t n, const ao_gen_config* gen, const ao_grid_spec* grid, int p,
                                     size_t workers, ao_dataset** out);
AO_API ao_status ao_dataset_load(const char* path, ao_dataset** out);
AO_API ao_status ao_dataset_save(const ao_dataset* ds, const char* path);
AO_API void ao_dataset_free(ao_dataset* ds);
AO_API size_t ao_dataset_size(const ao_dataset* ds);
AO_API ao_status ao_dataset_cost_stats(const ao_dataset* ds, double* min, double* mean, double* max);
/* The returned string lives as long as the dataset. */
AO_API const char* ao_dataset_entry_id(const ao_dataset* ds, size_t index);
AO_API ao_status ao_dataset_entry_cost(const ao_dataset* ds, size_t index, double* out);
AO_API ao_status ao_dataset_entry_layout(const ao_dataset* ds, size_t index, ao_layout** out);
AO_API ao_status ao_dataset_grid(const ao_dataset* ds, ao_grid_spec* out);
/* Writes the padded-input cache for the dataset file at dataset_path unless
 * cache_path already holds one built from the same file bytes. *written is
 * set to 1 when a new cache was written. */
AO_API ao_status ao_dataset_ensure_padded_cache(const ao_dataset* ds, const char* dataset_path,
                                                const char* cache_path, int* written);

/* ---- surrogate models ---- */

typedef struct ao_train_config {
  int epochs;
  double learning_rate;
  size_t batch_size;
  uint64_t seed;
  double train_fraction;
  uint64_t split_seed;
} ao_train_config;

typedef struct ao_train_result {
  size_t n_train;
  size_t n_val;
  double final_loss;
  double val_mse;
  double val_pearson;
  double seconds;
} ao_train_result;

AO_API ao_status ao_train_config_default(int arch, ao_train_config* out);
AO_API ao_status ao_model_create(int arch, uint64_t seed, int layer_norm, ao_model** out);
AO_API ao_status ao_model_load(const char* path, ao_model** out);
/* Writes the weights to path and the JSON sidecar to path + ".json". */
AO_API ao_status ao_model_save(const ao_model* model, const char* path, const ao_train_config* cfg);
AO_API void ao_model_free(ao_model* model);
AO_API int ao_model_arch(const ao_model* model);
/* Splits the dataset, trains, and fills result. loss_history, when non-NULL,
 * receives cfg->epochs values. */
AO_API ao_status ao_model_train(ao_model* model, const ao_dataset* ds, const ao_train_config* cfg,
                                ao_train_result* result, double* loss_history);
AO_API ao_status ao_model_predict(const ao_model* model, const ao_layout* layout, double* out);
/* grad receives 2 * size values in the layout's canonical (z, then y) order. */
AO_API ao_status ao_model_input_grad(const ao_model* model, const ao_layout* layout, double* grad);

/* ---- coordinate optimization ---- */

typedef struct ao_run_config {
  int max_iterations;
  double learning_rate;
  int mode;
  int clamp_to_aperture;
  uint64_t seed;
  double theta;
  double epsilon;
  double barrier_clamp;
  double pair_cutoff; /* <= 0 disables the cutoff */
} ao_run_config;

typedef struct ao_run_summary {
  char config_id[64];
  int termination;
  double cost_before;
  double cost_after;
  double pct_change;
  double min_dist_before;
  double min_dist_after;
  size_t iterations;
} ao_run_summary;

AO_API ao_status ao_run_config_default(int arch, ao_run_config* out);
AO_API ao_status ao_optimize(const ao_layout* layout, const ao_model* model, const ao_run_config* cfg,
                             const ao_grid_spec* grid, int p, const char* config_id, ao_run_record** out);
/* Runs the k lowest-cost configs of the dataset on up to `workers` threads,
 * scoring with the dataset's own grid. Results are in top-k order. */
AO_API ao_status ao_optimize_top_k(const ao_dataset* ds, const ao_model* model, const ao_run_config* cfg,
                                   size_t k, size_t workers, ao_run_batch** out);
AO_API size_t ao_run_batch_size(const ao_run_batch* batch);
/* Borrowed; valid until the batch is freed. */
AO_API const ao_run_record* ao_run_batch_get(const ao_run_batch* batch, size_t index);
AO_API void ao_run_batch_free(ao_run_batch* batch);
AO_API void ao_run_record_free(ao_run_record* rec);
AO_API ao_status ao_run_record_summary(const ao_run_record* rec, ao_run_summary* out);
AO_API ao_status ao_run_record_save(const ao_run_record* rec, const char* path);
AO_API ao_status ao_run_record_final_layout(const ao_run_record* rec, ao_layout** out);

AO_API ao_status ao_percent_change(double cost_before, double cost_after, double* out);

#ifdef __cplusplus
}
#endif

#endif /* ARRAYOPT_ARRAYOPT_H */
