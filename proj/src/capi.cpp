// Copyright 2026 The polyrefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "polyrefine/polyrefine.h"

#include <algorithm>
#include <memory>
#include <new>
#include <string>

#include "polyrefine/cnn.hpp"
#include "polyrefine/dataset.hpp"
#include "polyrefine/error.hpp"
#include "polyrefine/grid_gen.hpp"
#include "polyrefine/io.hpp"
#include "polyrefine/metrics.hpp"
#include "polyrefine/refine.hpp"

struct pr_mesh {
  polyrefine::Mesh mesh;
  polyrefine::RefineTimings timings;
};

struct pr_dataset {
  polyrefine::LabeledDataset data;
};

struct pr_model {
  polyrefine::CnnModel model;
};

namespace {

using namespace polyrefine;

thread_local std::string last_error;

pr_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kShape:
      return PR_ERR_USAGE;
    case ErrorCode::kFormat:
      return PR_ERR_FORMAT;
    case ErrorCode::kIo:
      return PR_ERR_IO;
    case ErrorCode::kUnrefinable:
      return PR_ERR_UNREFINABLE;
    case ErrorCode::kEmptySplit:
      return PR_ERR_DATASET;
    default:
      return PR_ERR_GEOMETRY;
  }
}

template <typename F>
pr_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return PR_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return PR_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kUsage, what);
}

Split split_of(int split) {
  require(split >= 0 && split <= 2, "split must be 0, 1 or 2");
  return static_cast<Split>(split);
}

}  // namespace

extern "C" {

const char* pr_last_error(void) { return last_error.c_str(); }

const char* pr_version(void) { return "1.0.0"; }

const char* pr_status_name(pr_status status) {
  switch (status) {
    case PR_OK: return "ok";
    case PR_ERR_USAGE: return "usage";
    case PR_ERR_FORMAT: return "format";
    case PR_ERR_IO: return "io";
    case PR_ERR_GEOMETRY: return "geometry";
    case PR_ERR_UNREFINABLE: return "unrefinable";
    case PR_ERR_DATASET: return "dataset";
    case PR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

pr_status pr_grid_generate(const char* kind, int resolution, uint64_t seed, int threads,
                           pr_mesh** out) {
  return guarded([&] {
    require(kind && out, "null argument");
    GridSpec spec;
    spec.kind = parse_grid_kind(kind);
    spec.resolution = resolution;
    spec.rng_seed = seed;
    spec.threads = threads;
    auto m = std::make_unique<pr_mesh>();
    m->mesh = generate_grid(spec);
    *out = m.release();
  });
}

pr_status pr_mesh_read(const char* path, pr_mesh** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto m = std::make_unique<pr_mesh>();
    m->mesh = read_mesh(path);
    *out = m.release();
  });
}

pr_status pr_mesh_write(const pr_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh && path, "null argument");
    write_mesh(mesh->mesh, path);
  });
}

pr_status pr_mesh_write_vtk(const pr_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh && path, "null argument");
    write_vtk(mesh->mesh, path);
  });
}

pr_status pr_mesh_clone(const pr_mesh* mesh, pr_mesh** out) {
  return guarded([&] {
    require(mesh && out, "null argument");
    *out = new pr_mesh(*mesh);
  });
}

void pr_mesh_free(pr_mesh* mesh) { delete mesh; }

size_t pr_mesh_element_count(const pr_mesh* mesh) { return mesh ? mesh->mesh.size() : 0; }

double pr_mesh_volume(const pr_mesh* mesh) { return mesh ? total_volume(mesh->mesh) : 0.0; }

double pr_mesh_size(const pr_mesh* mesh) { return mesh ? mesh_size(mesh->mesh) : 0.0; }

size_t pr_mesh_count_in_slab(const pr_mesh* mesh, double x_lo, double x_hi) {
  if (!mesh) return 0;
  size_t n = 0;
  for (const auto& [id, p] : mesh->mesh.elements) {
    const double x = centroid(p).x();
    n += x >= x_lo && x < x_hi;
  }
  return n;
}

pr_status pr_mesh_complexity(const pr_mesh* mesh, pr_complexity* out) {
  return guarded([&] {
    require(mesh && out, "null argument");
    const ComplexityStats s = complexity_stats(mesh->mesh, mesh->timings);
    *out = {s.n_vertices, s.n_edges, s.n_faces, s.n_elements, s.total_refine_time,
            s.mean_time_per_element};
  });
}

pr_status pr_write_complexity_csv(const char* const* names, const pr_mesh* const* meshes,
                                  size_t count, const char* path, int timings) {
  return guarded([&] {
    require(path && (count == 0 || (names && meshes)), "null argument");
    std::vector<std::pair<std::string, ComplexityStats>> rows;
    for (size_t i = 0; i < count; ++i) {
      require(names[i] && meshes[i], "null argument");
      rows.emplace_back(names[i], complexity_stats(meshes[i]->mesh, meshes[i]->timings));
    }
    write_complexity_csv(rows, path, timings != 0);
  });
}

pr_dataset_config pr_dataset_config_default(void) {
  const DatasetConfig d;
  return {d.per_shape, d.other, d.rng_seed, d.threads, d.perturbation.enabled ? 1 : 0,
          d.min_other_seeds, d.max_other_seeds};
}

pr_status pr_dataset_generate(const pr_dataset_config* cfg, pr_dataset** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    require(cfg->per_shape > 0 && cfg->other > 0, "sample counts must be positive");
    DatasetConfig d;
    d.per_shape = cfg->per_shape;
    d.other = cfg->other;
    d.rng_seed = cfg->seed;
    d.threads = cfg->threads;
    d.perturbation.enabled = cfg->perturb != 0;
    d.min_other_seeds = cfg->min_other_seeds;
    d.max_other_seeds = cfg->max_other_seeds;
    auto p = std::make_unique<pr_dataset>();
    p->data = generate_dataset(d);
    *out = p.release();
  });
}

pr_status pr_dataset_save(const pr_dataset* data, const char* path) {
  return guarded([&] {
    require(data && path, "null argument");
    save_dataset(data->data, path);
  });
}

pr_status pr_dataset_load(const char* path, pr_dataset** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto p = std::make_unique<pr_dataset>();
    p->data = load_dataset(path);
    *out = p.release();
  });
}

void pr_dataset_free(pr_dataset* data) { delete data; }

size_t pr_dataset_size(const pr_dataset* data) { return data ? data->data.samples.size() : 0; }

size_t pr_dataset_count(const pr_dataset* data, int label, int split) {
  if (!data || label < 0 || label >= kNumLabels || split < 0 || split > 2) return 0;
  return data->data.count(static_cast<ShapeLabel>(label), static_cast<Split>(split));
}

pr_train_config pr_train_config_default(void) {
  const TrainConfig t;
  return {t.learning_rate, t.batch_size,  t.max_epochs, t.patience,
          t.lr_patience,   t.weight_decay, t.rng_seed,   t.threads,
          t.verbose ? 1 : 0};
}

pr_status pr_model_new(uint64_t seed, pr_model** out) {
  return guarded([&] {
    require(out, "null argument");
    auto m = std::make_unique<pr_model>();
    m->model.initialize(seed);
    *out = m.release();
  });
}

pr_status pr_model_train(pr_model* model, const pr_dataset* data, const pr_train_config* cfg,
                         const char* history_csv, int* best_epoch) {
  return guarded([&] {
    require(model && data && cfg, "null argument");
    TrainConfig t;
    t.learning_rate = cfg->learning_rate;
    t.batch_size = cfg->batch_size;
    t.max_epochs = cfg->max_epochs;
    t.patience = cfg->patience;
    t.lr_patience = cfg->lr_patience;
    t.weight_decay = cfg->weight_decay;
    t.rng_seed = cfg->seed;
    t.threads = cfg->threads;
    t.verbose = cfg->verbose != 0;
    const TrainResult r = train(model->model, data->data, t);
    if (history_csv) write_history_csv(r, history_csv);
    if (best_epoch) *best_epoch = r.best_epoch;
  });
}

pr_status pr_model_evaluate(const pr_model* model, const pr_dataset* data, int split,
                            int threads, pr_evaluation* out) {
  return guarded([&] {
    require(model && data && out, "null argument");
    const Evaluation e = evaluate(model->model, data->data, split_of(split), threads);
    out->accuracy = e.accuracy;
    out->mean_loss = e.mean_loss;
    out->samples = e.samples;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        out->confusion[i][j] = e.normalized[i][j];
        out->counts[i][j] = e.counts[i][j];
      }
    }
  });
}

pr_status pr_model_save(const pr_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    save_model(model->model, path);
  });
}

pr_status pr_model_load(const char* path, pr_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new pr_model{load_model(path)};
  });
}

void pr_model_free(pr_model* model) { delete model; }

size_t pr_model_parameter_count(const pr_model* model) {
  return model ? model->model.parameter_count() : 0;
}

pr_status pr_classify(const pr_model* model, const pr_mesh* mesh, const char* labels_csv,
                      size_t counts[4]) {
  return guarded([&] {
    require(model && mesh, "null argument");
    const CnnClassifier classifier(model->model);
    std::vector<ElementLabel> labels;
    for (const auto& [id, p] : mesh->mesh.elements) {
      labels.push_back({id, classifier.classify(p)});
    }
    if (counts) {
      for (int i = 0; i < 4; ++i) counts[i] = 0;
      for (const auto& l : labels) ++counts[static_cast<int>(l.label)];
    }
    if (labels_csv) write_labels_csv(labels, labels_csv);
  });
}

const char* pr_label_name(int label) {
  if (label < 0 || label >= kNumLabels) return "unknown";
  return to_string(static_cast<ShapeLabel>(label));
}

pr_refine_config pr_refine_config_default(void) {
  const RefineConfig r;
  return {"diameter", 1,   0,   0.4, "boundary_layer", r.nmax, r.tol_factor,
          r.target_factor, r.emergency_attempts, r.kmeans_grid_points, r.rng_seed, 1};
}

pr_status pr_refine(pr_mesh* mesh, const pr_refine_config* cfg, const pr_model* model,
                    const char* log_csv, const char* steps_csv, int timings,
                    pr_refine_report* report) {
  return guarded([&] {
    require(mesh && cfg && cfg->strategy, "null argument");
    require(cfg->steps >= 0, "steps must be non-negative");
    RefineConfig rc;
    rc.strategy = parse_strategy(cfg->strategy);
    rc.nmax = cfg->nmax;
    rc.tol_factor = cfg->tol_factor;
    rc.target_factor = cfg->target_factor;
    rc.emergency_attempts = cfg->emergency_attempts;
    rc.kmeans_grid_points = cfg->kmeans_grid_points;
    rc.rng_seed = cfg->seed;
    require(rc.nmax >= 2, "nmax must be at least 2");
    require(rc.tol_factor > 0.0, "tolerance must be positive");
    std::unique_ptr<CnnClassifier> classifier;
    if (rc.strategy == Strategy::kCnn) {
      require(model != nullptr, "the cnn strategy needs a model");
      classifier = std::make_unique<CnnClassifier>(model->model);
    }
    DriverResult d;
    if (cfg->adaptive) {
      require(cfg->field != nullptr, "adaptive refinement needs a field");
      d = adaptive_refine(std::move(mesh->mesh), rc, field_by_name(cfg->field), cfg->r,
                          cfg->steps, classifier.get(), cfg->threads);
    } else {
      d = uniform_refine(std::move(mesh->mesh), rc, cfg->steps, classifier.get(),
                         cfg->threads);
    }
    mesh->mesh = std::move(d.mesh);
    mesh->timings.total_seconds += d.timings.total_seconds;
    mesh->timings.elements_refined += d.timings.elements_refined;
    for (const auto& [k, v] : d.timings.seconds_by_strategy) {
      mesh->timings.seconds_by_strategy[k] += v;
    }
    if (log_csv) write_refine_log_csv(d.log, log_csv, timings != 0);
    if (steps_csv) write_steps_csv(d.steps, steps_csv, timings != 0);
    if (report) {
      *report = {};
      report->attempted = d.attempted;
      report->unrefinable = d.unrefinable;
      report->elements = mesh->mesh.size();
      report->steps = d.steps.size();
      for (size_t i = 0; i < d.steps.size() && i < 16; ++i) {
        report->marked[i] = d.steps[i].marked;
      }
    }
  });
}

pr_status pr_quality_report(const pr_mesh* mesh, const char* quality_csv,
                            const char* histogram_csv, int threads, pr_quality* out) {
  return guarded([&] {
    require(mesh, "null argument");
    const QualityReport r =
        quality_report(mesh->mesh, complexity_stats(mesh->mesh, mesh->timings), threads);
    if (quality_csv) write_quality_csv(r, quality_csv);
    if (histogram_csv) write_histogram_csv(r, histogram_csv);
    if (out) {
      out->mean_uf = r.mean_uf;
      out->mean_cr = r.mean_cr;
      out->min_uf = 1.0;
      out->min_cr = 1.0;
      for (const auto& e : r.elements) {
        out->min_uf = std::min(out->min_uf, e.uf);
        out->min_cr = std::min(out->min_cr, e.cr);
      }
      for (int b = 0; b < kHistogramBins; ++b) {
        out->uf_histogram[b] = r.uf_histogram[b];
        out->cr_histogram[b] = r.cr_histogram[b];
      }
    }
  });
}

}  // extern "C"
