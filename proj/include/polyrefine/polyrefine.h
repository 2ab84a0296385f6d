/*
 * Copyright 2026 The polyrefine Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef POLYREFINE_H_
#define POLYREFINE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PR_API __declspec(dllexport)
#else
#define PR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pr_status {
  PR_OK = 0,
  PR_ERR_USAGE = 1,
  PR_ERR_FORMAT = 2,
  PR_ERR_IO = 3,
  PR_ERR_GEOMETRY = 4,
  PR_ERR_UNREFINABLE = 5,
  PR_ERR_DATASET = 6,
  PR_ERR_INTERNAL = 7
} pr_status;

typedef struct pr_mesh pr_mesh;
typedef struct pr_dataset pr_dataset;
typedef struct pr_model pr_model;

/* Message of the last failing call on this thread, or "". */
PR_API const char* pr_last_error(void);
PR_API const char* pr_version(void);
PR_API const char* pr_status_name(pr_status status);

/* ---- meshes ---- */

/* kind: tetrahedra | cubes | prisms | voronoi | cvt. resolution is elements
 * per axis for structured grids and the seed count otherwise. */
PR_API pr_status pr_grid_generate(const char* kind, int resolution, uint64_t seed,
                                  int threads, pr_mesh** out);
PR_API pr_status pr_mesh_read(const char* path, pr_mesh** out);
PR_API pr_status pr_mesh_write(const pr_mesh* mesh, const char* path);
PR_API pr_status pr_mesh_write_vtk(const pr_mesh* mesh, const char* path);
PR_API pr_status pr_mesh_clone(const pr_mesh* mesh, pr_mesh** out);
PR_API void pr_mesh_free(pr_mesh* mesh);

PR_API size_t pr_mesh_element_count(const pr_mesh* mesh);
PR_API double pr_mesh_volume(const pr_mesh* mesh);
PR_API double pr_mesh_size(const pr_mesh* mesh);
/* Elements whose centroid x lies in [x_lo, x_hi). */
PR_API size_t pr_mesh_count_in_slab(const pr_mesh* mesh, double x_lo, double x_hi);

typedef struct pr_complexity {
  size_t vertices;
  size_t edges;
  size_t faces;
  size_t elements;
  double total_refine_seconds;
  double mean_seconds_per_element;
} pr_complexity;

/* Refinement time accumulated by pr_refine calls on this mesh is included. */
PR_API pr_status pr_mesh_complexity(const pr_mesh* mesh, pr_complexity* out);
/* One row per mesh; timing columns only when timings != 0. */
PR_API pr_status pr_write_complexity_csv(const char* const* names,
                                         const pr_mesh* const* meshes, size_t count,
                                         const char* path, int timings);

/* ---- datasets ---- */

typedef struct pr_dataset_config {
  int per_shape;
  int other;
  uint64_t seed;
  int threads;
  int perturb;
  int min_other_seeds;
  int max_other_seeds;
} pr_dataset_config;

PR_API pr_dataset_config pr_dataset_config_default(void);
PR_API pr_status pr_dataset_generate(const pr_dataset_config* cfg, pr_dataset** out);
PR_API pr_status pr_dataset_save(const pr_dataset* data, const char* path);
PR_API pr_status pr_dataset_load(const char* path, pr_dataset** out);
PR_API void pr_dataset_free(pr_dataset* data);
PR_API size_t pr_dataset_size(const pr_dataset* data);
/* split: 0 train, 1 validation, 2 test; label: 0 tet, 1 prism, 2 cube, 3 other. */
PR_API size_t pr_dataset_count(const pr_dataset* data, int label, int split);

/* ---- models ---- */

typedef struct pr_train_config {
  double learning_rate;
  int batch_size;
  int max_epochs;
  int patience;
  /* Halve the learning rate after this many epochs without improvement; 0 disables. */
  int lr_patience;
  double weight_decay;
  uint64_t seed;
  int threads;
  int verbose;
} pr_train_config;

typedef struct pr_evaluation {
  double accuracy;
  double mean_loss;
  size_t samples;
  /* confusion[true][predicted], rows normalized to sum to 1. */
  double confusion[4][4];
  size_t counts[4][4];
} pr_evaluation;

PR_API pr_train_config pr_train_config_default(void);
PR_API pr_status pr_model_new(uint64_t seed, pr_model** out);
/* history_csv may be NULL. */
PR_API pr_status pr_model_train(pr_model* model, const pr_dataset* data,
                                const pr_train_config* cfg, const char* history_csv,
                                int* best_epoch);
PR_API pr_status pr_model_evaluate(const pr_model* model, const pr_dataset* data,
                                   int split, int threads, pr_evaluation* out);
PR_API pr_status pr_model_save(const pr_model* model, const char* path);
PR_API pr_status pr_model_load(const char* path, pr_model** out);
PR_API void pr_model_free(pr_model* model);
PR_API size_t pr_model_parameter_count(const pr_model* model);

/* Writes id,label rows when labels_csv is not NULL; counts has 4 slots. */
PR_API pr_status pr_classify(const pr_model* model, const pr_mesh* mesh,
                             const char* labels_csv, size_t counts[4]);
PR_API const char* pr_label_name(int label);

/* ---- refinement ---- */

typedef struct pr_refine_config {
  const char* strategy; /* diameter | kmeans | cnn | classical:tet|prism|cube */
  int steps;
  int adaptive;
  double r;
  const char* field; /* boundary_layer | constant */
  int nmax;
  double tol_factor;
  double target_factor;
  int emergency_attempts;
  int kmeans_grid_points;
  uint64_t seed;
  int threads;
} pr_refine_config;

typedef struct pr_refine_report {
  size_t attempted;
  size_t unrefinable;
  size_t elements;
  size_t steps;
  size_t marked[16]; /* elements marked per step, first 16 steps */
} pr_refine_report;

PR_API pr_refine_config pr_refine_config_default(void);
/* Refines mesh in place. model is required for the cnn strategy. Log paths
 * may be NULL; timing columns are written only when timings != 0. */
PR_API pr_status pr_refine(pr_mesh* mesh, const pr_refine_config* cfg,
                           const pr_model* model, const char* log_csv,
                           const char* steps_csv, int timings,
                           pr_refine_report* report);

/* ---- quality ---- */

typedef struct pr_quality {
  double mean_uf;
  double mean_cr;
  double min_uf;
  double min_cr;
  double uf_histogram[20];
  double cr_histogram[20];
} pr_quality;

/* CSV paths may be NULL. */
PR_API pr_status pr_quality_report(const pr_mesh* mesh, const char* quality_csv,
                                   const char* histogram_csv, int threads,
                                   pr_quality* out);

#ifdef __cplusplus
}
#endif

#endif /* POLYREFINE_H_ */
