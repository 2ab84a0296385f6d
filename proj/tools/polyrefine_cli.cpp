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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polyrefine/polyrefine.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitUnrefinable = 3;
constexpr int kExitFailure = 4;

class Failure : public std::runtime_error {
 public:
  Failure(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

void check(pr_status s) {
  if (s == PR_OK) return;
  const std::string msg = pr_last_error();
  switch (s) {
    case PR_ERR_USAGE: throw Failure(kExitUsage, msg);
    case PR_ERR_FORMAT:
    case PR_ERR_IO: throw Failure(kExitFormat, msg);
    default: throw Failure(kExitFailure, std::string(pr_status_name(s)) + ": " + msg);
  }
}

struct MeshDeleter {
  void operator()(pr_mesh* m) const { pr_mesh_free(m); }
};
struct ModelDeleter {
  void operator()(pr_model* m) const { pr_model_free(m); }
};
struct DatasetDeleter {
  void operator()(pr_dataset* d) const { pr_dataset_free(d); }
};
using MeshPtr = std::unique_ptr<pr_mesh, MeshDeleter>;
using ModelPtr = std::unique_ptr<pr_model, ModelDeleter>;
using DatasetPtr = std::unique_ptr<pr_dataset, DatasetDeleter>;

MeshPtr generate(const std::string& kind, int resolution, uint64_t seed, int threads) {
  pr_mesh* m = nullptr;
  check(pr_grid_generate(kind.c_str(), resolution, seed, threads, &m));
  return MeshPtr(m);
}

MeshPtr read_mesh(const std::string& path) {
  pr_mesh* m = nullptr;
  check(pr_mesh_read(path.c_str(), &m));
  return MeshPtr(m);
}

MeshPtr clone(const pr_mesh* mesh) {
  pr_mesh* m = nullptr;
  check(pr_mesh_clone(mesh, &m));
  return MeshPtr(m);
}

ModelPtr load_model(const std::string& path) {
  pr_model* m = nullptr;
  check(pr_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

struct Common {
  std::string out = ".";
  int threads = 1;
  uint64_t seed = 0;
  bool timings = false;
};

struct DatasetOptions {
  int per_shape = 600;
  int other = 450;
  bool no_perturb = false;
  int min_other_seeds = 8;
  int max_other_seeds = 64;
};

struct TrainOptions {
  std::string dataset;
  int epochs = pr_train_config_default().max_epochs;
  int batch = pr_train_config_default().batch_size;
  double lr = pr_train_config_default().learning_rate;
  int patience = pr_train_config_default().patience;
  int lr_patience = pr_train_config_default().lr_patience;
  double weight_decay = pr_train_config_default().weight_decay;
  bool verbose = false;
};

struct RefineOptions {
  std::string mesh;
  std::string model;
  std::string strategy = "diameter";
  int steps = 1;
  bool uniform = false;
  bool adaptive = false;
  double r = 0.4;
  std::string field = "boundary_layer";
  int nmax = 8;
  double tol_factor = 1e-3;
  double target_factor = 0.5;
  int emergency_attempts = 50;
  int kmeans_points = 8000;
  bool vtk = false;
};

std::string in_out(const Common& c, const std::string& name) {
  return (fs::path(c.out) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure(kExitFailure, "cannot write " + path);
  out << text;
}

void write_run_json(const Common& c, const std::string& command, ordered_json config) {
  ordered_json run;
  run["tool"] = "polyrefine";
  run["version"] = pr_version();
  run["command"] = command;
  run["seed"] = c.seed;
  run["threads"] = c.threads;
  run["timings"] = c.timings;
  run["out"] = c.out;
  run["config"] = std::move(config);
  write_text(in_out(c, "run.json"), run.dump(2) + "\n");
}

pr_refine_config refine_config(const Common& c, const RefineOptions& o) {
  pr_refine_config rc = pr_refine_config_default();
  rc.strategy = o.strategy.c_str();
  rc.steps = o.steps;
  rc.adaptive = o.adaptive ? 1 : 0;
  rc.r = o.r;
  rc.field = o.field.c_str();
  rc.nmax = o.nmax;
  rc.tol_factor = o.tol_factor;
  rc.target_factor = o.target_factor;
  rc.emergency_attempts = o.emergency_attempts;
  rc.kmeans_grid_points = o.kmeans_points;
  rc.seed = c.seed;
  rc.threads = c.threads;
  return rc;
}

ordered_json refine_json(const RefineOptions& o) {
  return {{"mesh", o.mesh},
          {"model", o.model},
          {"strategy", o.strategy},
          {"steps", o.steps},
          {"mode", o.adaptive ? "adaptive" : "uniform"},
          {"r", o.r},
          {"field", o.field},
          {"nmax", o.nmax},
          {"tol_factor", o.tol_factor},
          {"target_factor", o.target_factor},
          {"emergency_attempts", o.emergency_attempts},
          {"kmeans_points", o.kmeans_points}};
}

// ---- subcommands ----

int cmd_gen_grid(const Common& c, const std::string& kind, int resolution, bool vtk) {
  const MeshPtr m = generate(kind, resolution, c.seed, c.threads);
  check(pr_mesh_write(m.get(), in_out(c, "mesh.json").c_str()));
  if (vtk) check(pr_mesh_write_vtk(m.get(), in_out(c, "mesh.vtk").c_str()));
  write_run_json(c, "gen-grid", {{"kind", kind}, {"resolution", resolution}, {"vtk", vtk}});
  std::printf("%zu elements, volume %.12g\n", pr_mesh_element_count(m.get()),
              pr_mesh_volume(m.get()));
  return 0;
}

pr_dataset_config dataset_config(const Common& c, const DatasetOptions& o) {
  pr_dataset_config dc = pr_dataset_config_default();
  dc.per_shape = o.per_shape;
  dc.other = o.other;
  dc.seed = c.seed;
  dc.threads = c.threads;
  dc.perturb = o.no_perturb ? 0 : 1;
  dc.min_other_seeds = o.min_other_seeds;
  dc.max_other_seeds = o.max_other_seeds;
  return dc;
}

ordered_json dataset_json(const DatasetOptions& o) {
  return {{"per_shape", o.per_shape},
          {"other", o.other},
          {"perturb", !o.no_perturb},
          {"min_other_seeds", o.min_other_seeds},
          {"max_other_seeds", o.max_other_seeds}};
}

int cmd_gen_dataset(const Common& c, const DatasetOptions& o) {
  const pr_dataset_config dc = dataset_config(c, o);
  pr_dataset* raw = nullptr;
  check(pr_dataset_generate(&dc, &raw));
  const DatasetPtr d(raw);
  check(pr_dataset_save(d.get(), in_out(c, "dataset.bin").c_str()));
  write_run_json(c, "gen-dataset", dataset_json(o));
  std::printf("%zu samples\n", pr_dataset_size(d.get()));
  return 0;
}

void write_confusion_csv(const pr_evaluation& e, const std::string& path) {
  std::string text = "true,tetrahedron,prism,cube,other\n";
  char buf[64];
  for (int i = 0; i < 4; ++i) {
    text += pr_label_name(i);
    for (int j = 0; j < 4; ++j) {
      std::snprintf(buf, sizeof buf, ",%.6f", e.confusion[i][j]);
      text += buf;
    }
    text += '\n';
  }
  write_text(path, text);
}

ModelPtr train_model(const Common& c, const pr_dataset* data, const TrainOptions& o,
                     const std::string& prefix) {
  pr_model* raw = nullptr;
  check(pr_model_new(c.seed, &raw));
  ModelPtr model(raw);
  pr_train_config tc = pr_train_config_default();
  tc.max_epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.learning_rate = o.lr;
  tc.patience = o.patience;
  tc.lr_patience = o.lr_patience;
  tc.weight_decay = o.weight_decay;
  tc.seed = c.seed;
  tc.threads = c.threads;
  tc.verbose = o.verbose ? 1 : 0;
  int best = 0;
  check(pr_model_train(model.get(), data, &tc, in_out(c, prefix + "history.csv").c_str(),
                       &best));
  check(pr_model_save(model.get(), in_out(c, prefix + "model.bin").c_str()));
  pr_evaluation e{};
  check(pr_model_evaluate(model.get(), data, 2, c.threads, &e));
  write_confusion_csv(e, in_out(c, prefix + "confusion.csv"));
  std::printf("best epoch %d, test accuracy %.4f on %zu samples\n", best, e.accuracy,
              e.samples);
  return model;
}

ordered_json train_json(const TrainOptions& o) {
  return {{"dataset", o.dataset}, {"epochs", o.epochs}, {"batch", o.batch},
          {"lr", o.lr},           {"patience", o.patience}, {"lr_patience", o.lr_patience},
          {"weight_decay", o.weight_decay}};
}

int cmd_train(const Common& c, const TrainOptions& o) {
  pr_dataset* raw = nullptr;
  check(pr_dataset_load(o.dataset.c_str(), &raw));
  const DatasetPtr data(raw);
  train_model(c, data.get(), o, "");
  write_run_json(c, "train", train_json(o));
  return 0;
}

int cmd_classify(const Common& c, const std::string& mesh_path, const std::string& model_path) {
  const MeshPtr m = read_mesh(mesh_path);
  const ModelPtr model = load_model(model_path);
  size_t counts[4];
  check(pr_classify(model.get(), m.get(), in_out(c, "labels.csv").c_str(), counts));
  write_run_json(c, "classify", {{"mesh", mesh_path}, {"model", model_path}});
  for (int i = 0; i < 4; ++i) std::printf("%s %zu\n", pr_label_name(i), counts[i]);
  return 0;
}

// More than 1% of refinement attempts left elements intact.
bool over_budget(const pr_refine_report& r) {
  return r.attempted > 0 && 100 * r.unrefinable > r.attempted;
}

int cmd_refine(const Common& c, RefineOptions o) {
  if (o.uniform && o.adaptive) throw Failure(kExitUsage, "--uniform and --adaptive conflict");
  const MeshPtr m = read_mesh(o.mesh);
  ModelPtr model;
  if (o.strategy == "cnn") {
    if (o.model.empty()) throw Failure(kExitUsage, "--strategy cnn needs --model");
    model = load_model(o.model);
  }
  const pr_refine_config rc = refine_config(c, o);
  pr_refine_report report{};
  check(pr_refine(m.get(), &rc, model.get(), in_out(c, "refine_log.csv").c_str(),
                  in_out(c, "steps.csv").c_str(), c.timings ? 1 : 0, &report));
  check(pr_mesh_write(m.get(), in_out(c, "refined.json").c_str()));
  if (o.vtk) check(pr_mesh_write_vtk(m.get(), in_out(c, "refined.vtk").c_str()));
  write_run_json(c, "refine", refine_json(o));
  std::printf("%zu elements after %zu steps, %zu of %zu refinements failed\n",
              report.elements, report.steps, report.unrefinable, report.attempted);
  if (over_budget(report)) {
    std::fprintf(stderr, "error: more than 1%% of elements could not be refined\n");
    return kExitUnrefinable;
  }
  return 0;
}

int cmd_metrics(const Common& c, const std::string& mesh_path) {
  const MeshPtr m = read_mesh(mesh_path);
  pr_quality q{};
  check(pr_quality_report(m.get(), in_out(c, "quality.csv").c_str(),
                          in_out(c, "quality_hist.csv").c_str(), c.threads, &q));
  const char* name = "mesh";
  const pr_mesh* meshes[] = {m.get()};
  check(pr_write_complexity_csv(&name, meshes, 1, in_out(c, "complexity.csv").c_str(),
                                c.timings ? 1 : 0));
  write_run_json(c, "metrics", {{"mesh", mesh_path}});
  std::printf("mean UF %.4f, mean CR %.4f\n", q.mean_uf, q.mean_cr);
  return 0;
}

// ---- reproduce ----

struct GridChoice {
  std::string kind;
  int resolution;
};

const std::vector<GridChoice>& desk_grids() {
  static const std::vector<GridChoice> grids{
      {"tetrahedra", 2}, {"cubes", 4}, {"prisms", 3}, {"voronoi", 64}, {"cvt", 64}};
  return grids;
}

struct ReproduceOptions {
  std::vector<std::string> grids;
  std::vector<std::string> strategies{"diameter", "kmeans", "cnn"};
  std::string model;
  int steps = 3;
  double r = 0.4;
  TrainOptions train;
  DatasetOptions dataset;
};

ModelPtr reproduce_model(const Common& c, const ReproduceOptions& o) {
  bool needs = false;
  for (const auto& s : o.strategies) needs |= s == "cnn";
  if (!needs) return nullptr;
  if (!o.model.empty()) return load_model(o.model);
  std::printf("no --model given, training one on the desk-scale dataset\n");
  const pr_dataset_config dc = dataset_config(c, o.dataset);
  pr_dataset* raw = nullptr;
  check(pr_dataset_generate(&dc, &raw));
  const DatasetPtr data(raw);
  return train_model(c, data.get(), o.train, "cnn_");
}

const char* kPlotQuality = R"(import csv, glob, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
files = sorted(glob.glob(os.path.join(here, "*_hist.csv")))
fig, axes = plt.subplots(len(files), 2, figsize=(8, 2.2 * len(files)), squeeze=False)
for row, path in enumerate(files):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    lo = [float(r["bin_lo"]) for r in rows]
    for col, key in enumerate(["uf_percent", "cr_percent"]):
        ax = axes[row][col]
        ax.bar(lo, [float(r[key]) for r in rows], width=0.05, align="edge")
        ax.set_xlim(0, 1)
        ax.set_title(os.path.basename(path)[:-9] + (" UF" if col == 0 else " CR"), fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(here, "quality.png"), dpi=150)
)";

const char* kPlotComplexity = R"(import csv, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "complexity.csv")) as f:
    rows = list(csv.DictReader(f))
keys = ["vertices", "edges", "faces", "elements"]
fig, axes = plt.subplots(1, len(keys), figsize=(4 * len(keys), 4))
for ax, key in zip(axes, keys):
    ax.barh([r["run"] for r in rows], [int(r[key]) for r in rows])
    ax.set_title(key)
    ax.tick_params(labelsize=6)
fig.tight_layout()
fig.savefig(os.path.join(here, "complexity.png"), dpi=150)
)";

const char* kPlotAdaptive = R"(import csv, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "density.csv")) as f:
    rows = list(csv.DictReader(f))
fig, ax = plt.subplots(figsize=(8, 4))
ax.barh([r["run"] for r in rows], [float(r["ratio"]) for r in rows])
ax.set_xlabel("density near x = 0 / density near x = 1")
ax.tick_params(labelsize=6)
fig.tight_layout()
fig.savefig(os.path.join(here, "density.png"), dpi=150)
)";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_reproduce(const Common& base, const std::string& figure, ReproduceOptions o) {
  static const std::map<std::string, std::string> dirs{
      {"fig7", "fig7"}, {"fig8", "fig8"}, {"fig9", "fig9"}, {"fig12", "fig12"}};
  if (!dirs.count(figure)) throw Failure(kExitUsage, "unknown figure '" + figure + "'");
  Common c = base;
  fs::create_directories(c.out);
  std::vector<GridChoice> grids;
  for (const auto& g : desk_grids()) {
    if (o.grids.empty() || std::find(o.grids.begin(), o.grids.end(), g.kind) != o.grids.end()) {
      grids.push_back(g);
    }
  }
  if (grids.empty()) throw Failure(kExitUsage, "no known grid selected");
  const ModelPtr model = reproduce_model(c, o);
  const bool adaptive = figure == "fig12";

  std::vector<std::string> names;
  std::vector<MeshPtr> refined;
  std::string summary = adaptive ? "run,elements,near_x0,near_x1,ratio\n"
                                 : "run,elements,mean_uf,mean_cr,unrefinable\n";
  bool budget_exceeded = false;
  for (const auto& g : grids) {
    const MeshPtr coarse = generate(g.kind, g.resolution, c.seed, c.threads);
    if (figure == "fig7") {
      check(pr_mesh_write_vtk(coarse.get(), in_out(c, g.kind + "_coarse.vtk").c_str()));
    }
    for (const auto& s : o.strategies) {
      const std::string name = g.kind + "_" + s;
      MeshPtr m = clone(coarse.get());
      RefineOptions ro;
      ro.strategy = s;
      ro.steps = o.steps;
      ro.adaptive = adaptive;
      ro.r = o.r;
      const pr_refine_config rc = refine_config(c, ro);
      pr_refine_report report{};
      check(pr_refine(m.get(), &rc, model.get(), nullptr,
                      in_out(c, name + "_steps.csv").c_str(), c.timings ? 1 : 0, &report));
      budget_exceeded |= over_budget(report);
      std::printf("%-20s %7zu elements\n", name.c_str(), report.elements);
      if (figure == "fig7") {
        check(pr_mesh_write_vtk(m.get(), in_out(c, name + ".vtk").c_str()));
        check(pr_mesh_write(m.get(), in_out(c, name + ".json").c_str()));
      }
      if (figure == "fig8") {
        pr_quality q{};
        check(pr_quality_report(m.get(), in_out(c, name + "_quality.csv").c_str(),
                                in_out(c, name + "_hist.csv").c_str(), c.threads, &q));
        summary += name + ',' + std::to_string(report.elements) + ',' + fmt(q.mean_uf) + ',' +
                   fmt(q.mean_cr) + ',' + std::to_string(report.unrefinable) + '\n';
      }
      if (figure == "fig12") {
        check(pr_mesh_write_vtk(m.get(), in_out(c, name + ".vtk").c_str()));
        const double near0 = static_cast<double>(pr_mesh_count_in_slab(m.get(), 0.0, 0.25));
        const double near1 = static_cast<double>(pr_mesh_count_in_slab(m.get(), 0.75, 1.0 + 1e-12));
        summary += name + ',' + std::to_string(report.elements) + ',' + fmt(near0) + ',' +
                   fmt(near1) + ',' + fmt(near1 > 0 ? near0 / near1 : 0.0) + '\n';
      }
      names.push_back(name);
      refined.push_back(std::move(m));
    }
  }
  if (figure == "fig8") {
    write_text(in_out(c, "quality_summary.csv"), summary);
    write_text(in_out(c, "plot_quality.py"), kPlotQuality);
  }
  if (figure == "fig9" || figure == "fig7") {
    std::vector<const char*> name_ptrs;
    std::vector<const pr_mesh*> mesh_ptrs;
    for (std::size_t i = 0; i < names.size(); ++i) {
      name_ptrs.push_back(names[i].c_str());
      mesh_ptrs.push_back(refined[i].get());
    }
    check(pr_write_complexity_csv(name_ptrs.data(), mesh_ptrs.data(), names.size(),
                                  in_out(c, "complexity.csv").c_str(), c.timings ? 1 : 0));
    if (figure == "fig9") write_text(in_out(c, "plot_complexity.py"), kPlotComplexity);
  }
  if (figure == "fig12") {
    write_text(in_out(c, "density.csv"), summary);
    write_text(in_out(c, "plot_density.py"), kPlotAdaptive);
  }
  ordered_json grid_json = ordered_json::array();
  for (const auto& g : grids) grid_json.push_back({{"kind", g.kind}, {"resolution", g.resolution}});
  write_run_json(c, "reproduce " + figure,
                 {{"grids", grid_json},
                  {"strategies", o.strategies},
                  {"steps", o.steps},
                  {"mode", adaptive ? "adaptive" : "uniform"},
                  {"r", o.r},
                  {"model", o.model},
                  {"dataset", dataset_json(o.dataset)},
                  {"train", train_json(o.train)}});
  return budget_exceeded ? kExitUnrefinable : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyhedral mesh refinement with geometric and CNN-guided strategies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pr_version());
  Common common;
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", common.seed, "Random seed (POLYREFINE_SEED overrides)")
      ->capture_default_str();
  app.add_flag("--timings", common.timings, "Include wall-clock columns in CSV logs");

  std::string kind = "cubes";
  int resolution = 4;
  bool grid_vtk = false;
  auto* gen_grid = app.add_subcommand("gen-grid", "Generate a coarse grid of the unit cube");
  gen_grid->add_option("--kind", kind, "tetrahedra, cubes, prisms, voronoi or cvt")
      ->check(CLI::IsMember({"tetrahedra", "cubes", "prisms", "voronoi", "cvt"}))
      ->capture_default_str();
  gen_grid->add_option("--resolution", resolution, "Elements per axis or seed count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_grid->add_flag("--vtk", grid_vtk, "Also write mesh.vtk");

  DatasetOptions dataset;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "Generate the labelled image dataset");
  gen_dataset->add_option("--per-shape", dataset.per_shape)->capture_default_str();
  gen_dataset->add_option("--other", dataset.other)->capture_default_str();
  gen_dataset->add_option("--min-other-seeds", dataset.min_other_seeds)->capture_default_str();
  gen_dataset->add_option("--max-other-seeds", dataset.max_other_seeds)->capture_default_str();
  gen_dataset->add_flag("--no-perturb", dataset.no_perturb, "Use the undistorted base shapes");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train the shape classifier");
  train_cmd->add_option("--dataset", train.dataset)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", train.epochs)->capture_default_str();
  train_cmd->add_option("--batch", train.batch)->capture_default_str();
  train_cmd->add_option("--lr", train.lr)->capture_default_str();
  train_cmd->add_option("--patience", train.patience)->capture_default_str();
  train_cmd
      ->add_option("--lr-patience", train.lr_patience,
                   "Epochs without improvement before halving the learning rate")
      ->capture_default_str();
  train_cmd->add_option("--weight-decay", train.weight_decay)->capture_default_str();
  train_cmd->add_flag("--verbose", train.verbose);

  std::string mesh_path, model_path;
  auto* classify = app.add_subcommand("classify", "Label every element of a mesh");
  classify->add_option("--mesh", mesh_path)->required()->check(CLI::ExistingFile);
  classify->add_option("--model", model_path)->required()->check(CLI::ExistingFile);

  RefineOptions refine;
  auto* refine_cmd = app.add_subcommand("refine", "Refine a mesh");
  refine_cmd->add_option("--mesh", refine.mesh)->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--model", refine.model, "Trained model for --strategy cnn")
      ->check(CLI::ExistingFile);
  refine_cmd
      ->add_option("--strategy", refine.strategy,
                   "diameter, kmeans, cnn, classical:tet, classical:prism or classical:cube")
      ->check(CLI::IsMember({"diameter", "kmeans", "cnn", "classical:tet", "classical:prism",
                             "classical:cube"}))
      ->capture_default_str();
  refine_cmd->add_option("--steps", refine.steps)->check(CLI::NonNegativeNumber)->capture_default_str();
  refine_cmd->add_flag("--uniform", refine.uniform, "Refine every element (default)");
  refine_cmd->add_flag("--adaptive", refine.adaptive, "Refine the elements with the largest indicator");
  refine_cmd->add_option("--r", refine.r, "Fraction marked per adaptive step")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  refine_cmd->add_option("--field", refine.field)
      ->check(CLI::IsMember({"boundary_layer", "constant"}))
      ->capture_default_str();
  refine_cmd->add_option("--nmax", refine.nmax)->check(CLI::Range(2, 1 << 20))->capture_default_str();
  refine_cmd->add_option("--tol-factor", refine.tol_factor)->capture_default_str();
  refine_cmd->add_option("--target-factor", refine.target_factor)->capture_default_str();
  refine_cmd->add_option("--emergency-attempts", refine.emergency_attempts)->capture_default_str();
  refine_cmd->add_option("--kmeans-points", refine.kmeans_points)->capture_default_str();
  refine_cmd->add_flag("--vtk", refine.vtk, "Also write refined.vtk");

  auto* metrics = app.add_subcommand("metrics", "Quality and complexity reports");
  metrics->add_option("--mesh", mesh_path)->required()->check(CLI::ExistingFile);

  std::string figure;
  ReproduceOptions repro;
  auto* reproduce = app.add_subcommand("reproduce", "Run a desk-scale experiment pipeline");
  reproduce->add_option("figure", figure, "fig7, fig8, fig9 or fig12")
      ->required()
      ->check(CLI::IsMember({"fig7", "fig8", "fig9", "fig12"}));
  reproduce->add_option("--grids", repro.grids, "Subset of grid kinds");
  reproduce->add_option("--strategies", repro.strategies)->capture_default_str();
  reproduce->add_option("--model", repro.model, "Trained model; trained on the fly if absent")
      ->check(CLI::ExistingFile);
  reproduce->add_option("--steps", repro.steps)->capture_default_str();
  reproduce->add_option("--epochs", repro.train.epochs)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (const char* env = std::getenv("POLYREFINE_SEED")) {
    try {
      common.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: POLYREFINE_SEED must be an unsigned integer\n");
      return kExitUsage;
    }
  }
  try {
    fs::create_directories(common.out);
    if (*gen_grid) return cmd_gen_grid(common, kind, resolution, grid_vtk);
    if (*gen_dataset) return cmd_gen_dataset(common, dataset);
    if (*train_cmd) return cmd_train(common, train);
    if (*classify) return cmd_classify(common, mesh_path, model_path);
    if (*refine_cmd) return cmd_refine(common, refine);
    if (*metrics) return cmd_metrics(common, mesh_path);
    if (*reproduce) return cmd_reproduce(common, figure, repro);
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
