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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--model PATH] [--cli PATH] [--work DIR] [--only 1,5,...]
//
// Without --model the desk-scale classifier is trained from scratch, which is
// itself criterion 6.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polyrefine/clustering.hpp"
#include "polyrefine/cnn.hpp"
#include "polyrefine/dataset.hpp"
#include "polyrefine/error.hpp"
#include "polyrefine/grid_gen.hpp"
#include "polyrefine/io.hpp"
#include "polyrefine/metrics.hpp"
#include "polyrefine/refine.hpp"
#include "polyrefine/voxel.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace polyrefine;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct GridCase {
  GridKind kind;
  int resolution;
};

const std::vector<GridCase> kDeskGrids{{GridKind::kTetrahedra, 2},
                                       {GridKind::kCubes, 4},
                                       {GridKind::kPrisms, 3},
                                       {GridKind::kVoronoi, 64},
                                       {GridKind::kCvt, 64}};

const std::vector<Strategy> kCompared{Strategy::kDiameter, Strategy::kKMeans, Strategy::kCnn};

Mesh desk_grid(const GridCase& g) {
  GridSpec spec;
  spec.kind = g.kind;
  spec.resolution = g.resolution;
  return generate_grid(spec);
}

struct Context {
  std::optional<CnnModel> model;
  std::string model_path;
  std::string cli;
  fs::path work;
  // Uniform runs keyed by (grid, strategy), kept for the comparisons.
  std::map<std::pair<GridKind, Strategy>, DriverResult> uniform;
  double uniform_seconds = 0.0;
};

// ---- 5: gradient check ----

Outcome gradient_check() {
  CnnArchitecture arch;
  arch.input_side = 4;
  arch.kernels = {2, 2};
  arch.filters = {2, 2};
  CnnModel m(arch);
  m.initialize(21);
  Rng rng(22);
  for (Eigen::Index i = 0; i < m.parameters().size(); ++i) {
    m.parameters()(i) += rng.uniform(-0.2, 0.2);
  }
  const auto loss = [](const CnnModel& model, const Eigen::MatrixXd& x, int label) {
    return cross_entropy(softmax(logits(model, x)), label);
  };
  const double h = 1e-4;
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    Eigen::MatrixXd x(64, 1);
    for (int v = 0; v < 64; ++v) x(v, 0) = rng.uniform() < 0.4 ? 1.0 : 0.0;
    const int label = static_cast<int>(rng.below(kNumLabels));
    const auto i = static_cast<Eigen::Index>(rng.below(m.parameter_count()));
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(m.parameter_count());
    backward(m, x, label, grad);
    CnnModel plus = m, minus = m;
    plus.parameters()(i) += h;
    minus.parameters()(i) -= h;
    const double fd = (loss(plus, x, label) - loss(minus, x, label)) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad(i)), 1e-8});
    worst = std::max(worst, std::abs(fd - grad(i)) / scale);
  }
  return {worst <= 1e-4, fmt("max relative error %.2e over 100 probes", worst)};
}

// ---- 4: k-means on a 2x1x1 box ----

Outcome kmeans_box() {
  const Polyhedron box = make_box({0, 0, 0}, {2, 1, 1});
  const Point3 center(1, 0.5, 0.5);
  double worst_angle = 0.0, worst_offset = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    KMeansConfig cfg;
    cfg.n_grid_points = 20 * 20 * 20;
    cfg.rng_seed = seed;
    const auto r = kmeans_cutting_plane(box, cfg);
    const double angle =
        std::acos(std::min(1.0, std::abs(r.plane.normal.x()))) * 180.0 / std::numbers::pi;
    worst_angle = std::max(worst_angle, angle);
    worst_offset = std::max(worst_offset, (r.plane.origin - center).norm());
    for (std::size_t i = 1; i < r.objective.size(); ++i) {
      monotone &= r.objective[i] <= r.objective[i - 1] * (1 + 1e-12);
    }
  }
  return {worst_angle <= 5.0 && worst_offset <= 0.05 && monotone,
          fmt("worst angle %.3g deg", worst_angle) + fmt(", worst offset %.3g", worst_offset) +
              (monotone ? ", objective monotone" : ", objective increased")};
}

// ---- 3: child count and size ----

Outcome child_contracts(const Context& ctx) {
  const CnnClassifier classifier(*ctx.model);
  std::vector<Polyhedron> elements;
  for (const auto& g : kDeskGrids) {
    const Mesh m = desk_grid(g);
    int taken = 0;
    for (const auto& [id, p] : m.elements) {
      if (taken++ < 12) elements.push_back(p);
    }
  }
  Rng rng(31);
  for (int i = 0; i < 60; ++i) {
    Polyhedron p = testing::random_convex(rng, 8 + static_cast<int>(rng.below(20)));
    p.id = 1000 + i;
    elements.push_back(std::move(p));
  }
  std::size_t most = 0, runs = 0;
  for (const auto& p : elements) {
    for (Strategy s : {Strategy::kDiameter, Strategy::kKMeans, Strategy::kCnn,
                       Strategy::kClassicalTet, Strategy::kClassicalPrism,
                       Strategy::kClassicalCube}) {
      RefineConfig cfg;
      cfg.strategy = s;
      const auto r = refine_element(p, cfg, &classifier);
      most = std::max(most, r.children.size());
      ++runs;
    }
  }
  // Affine images of the unit cube: octants have exactly half the diameter.
  double worst = 0.0;
  const Polyhedron unit = make_box({0, 0, 0}, {1, 1, 1});
  for (int i = 0; i < 40; ++i) {
    Eigen::Matrix3d a;
    do {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a(r, c) = rng.uniform(-1.0, 1.0) + (r == c ? 1.5 : 0.0);
      }
    } while (a.determinant() < 0.2);
    Polyhedron p = transformed(unit, a, Vec3(rng.uniform(), rng.uniform(), rng.uniform()));
    RefineConfig cfg;
    cfg.strategy = Strategy::kClassicalCube;
    const auto r = refine_element(p, cfg);
    const double half = diameter(p) / 2;
    if (r.children.size() != 8) worst = std::max(worst, 1.0);
    for (const auto& c : r.children) worst = std::max(worst, std::abs(diameter(c) - half));
  }
  return {most <= 8 && worst <= 1e-9,
          "max " + std::to_string(most) + " children over " + std::to_string(runs) +
              " refinements" + fmt(", octant diameter error %.2e", worst)};
}

// ---- 11: validity on random polyhedra ----

Outcome validity_suite(const Context& ctx) {
  const CnnClassifier classifier(*ctx.model);
  const std::vector<Strategy> strategies{Strategy::kDiameter,      Strategy::kKMeans,
                                         Strategy::kCnn,           Strategy::kClassicalTet,
                                         Strategy::kClassicalPrism, Strategy::kClassicalCube};
  Rng rng(41);
  int bad = 0, skipped = 0, unrefinable = 0;
  std::size_t children = 0;
  for (int i = 0; i < 1000; ++i) {
    Polyhedron p = testing::random_convex(rng, 6 + static_cast<int>(rng.below(30)));
    p.id = i;
    const double tol = 1e-3 * diameter(p);
    if (min_edge_length(p) < 0.1 * tol) {
      // The parent itself violates the bound; draw another.
      ++skipped;
      --i;
      continue;
    }
    RefineConfig cfg;
    cfg.strategy = strategies[rng.below(strategies.size())];
    const auto r = refine_element(p, cfg, &classifier);
    unrefinable += r.unrefinable;
    for (const auto& c : r.children) {
      ++children;
      const auto t = check_topology(c);
      if (!t.closed_genus0() || !(volume(c) > 0) || min_edge_length(c) < 0.1 * tol) ++bad;
    }
  }
  const double tol = 1e-3 * std::sqrt(3.0);
  const Polyhedron dented = testing::dented_cube();
  const auto cut = clip_by_plane(dented, CuttingPlane::make({0, 0, 0.6}, {0, 0, 1}));
  const bool rejected = !validity_check(dented, cut, tol) && !validity_check(cut.children(), tol);
  return {bad == 0 && rejected,
          std::to_string(children) + " children, " + std::to_string(bad) + " invalid, " +
              std::to_string(unrefinable) + " unrefinable, " + std::to_string(skipped) +
              " resampled inputs; hole cut " + (rejected ? "rejected" : "ACCEPTED")};
}

// ---- 6: classifier training ----

Outcome train_classifier(Context& ctx) {
  const auto start = Clock::now();
  DatasetConfig dc;
  const LabeledDataset data = generate_dataset(dc);
  double seconds = 0.0;
  bool trained = false;
  if (ctx.model_path.empty()) {
    CnnModel model;
    model.initialize(dc.rng_seed);
    TrainConfig tc;
    tc.rng_seed = dc.rng_seed;
    train(model, data, tc);
    seconds = seconds_since(start);
    save_model(model, (ctx.work / "desk_model.bin").string());
    ctx.model = std::move(model);
    trained = true;
  } else {
    ctx.model = load_model(ctx.model_path);
  }
  const Evaluation e = evaluate(*ctx.model, data, Split::kTest);
  double others = 1.0;
  for (int c = 0; c < 3; ++c) others = std::min(others, e.normalized[c][c]);
  const double other = e.normalized[3][3];
  std::string diag;
  for (int c = 0; c < 4; ++c) diag += fmt(c ? " %.3f" : "%.3f", e.normalized[c][c]);
  const bool pass = e.accuracy >= 0.85 && other <= others && (!trained || seconds < 1200.0);
  return {pass, std::to_string(data.samples.size()) + " images, test accuracy " +
                    fmt("%.4f", e.accuracy) + ", diagonal [" + diag + "]" +
                    (trained ? fmt(", trained in %.0f s", seconds) : ", loaded model")};
}

// ---- 7: CVT generalization ----

Outcome cvt_generalization(const Context& ctx) {
  GridSpec spec;
  spec.kind = GridKind::kCvt;
  spec.resolution = 64;
  spec.rng_seed = 2024;
  spec.cvt_iterations = 500;
  spec.cvt_tolerance = 1e-6;
  const Mesh cvt = generate_grid(spec);
  std::array<int, kNumLabels> counts{};
  for (const auto& [id, p] : cvt.elements) ++counts[static_cast<int>(predict(*ctx.model, voxelize(p)))];
  const int shaped = counts[0] + counts[1] + counts[2];
  std::string detail;
  for (ShapeLabel l : kAllLabels) {
    detail += std::string(detail.empty() ? "" : ", ") + to_string(l) + " " +
              std::to_string(counts[static_cast<int>(l)]);
  }
  return {2 * shaped >= static_cast<int>(cvt.size()), detail};
}

// ---- 2: structure preservation ----

bool axis_aligned_box(const Polyhedron& p) {
  if (p.vertices.size() != 8 || p.faces.size() != 6) return false;
  const BoundingBox b = bounding_box(p);
  for (const auto& v : p.vertices) {
    for (int k = 0; k < 3; ++k) {
      if (std::min(std::abs(v[k] - b.lo[k]), std::abs(v[k] - b.hi[k])) > 1e-9) return false;
    }
  }
  return std::abs(volume(p) - b.extent().prod()) <= 1e-9;
}

Outcome structure_preservation(const Context& ctx) {
  const CnnClassifier classifier(*ctx.model);
  const Mesh grid = desk_grid({GridKind::kCubes, 4});
  RefineConfig cfg;
  cfg.strategy = Strategy::kCnn;
  const DriverResult cnn = uniform_refine(grid, cfg, 1, &classifier);
  cfg.strategy = Strategy::kClassicalCube;
  const DriverResult classical = uniform_refine(grid, cfg, 1);
  int boxes = 0;
  for (const auto& [id, p] : cnn.mesh.elements) boxes += axis_aligned_box(p);
  bool identical = cnn.mesh.size() == classical.mesh.size();
  for (const auto& [id, p] : cnn.mesh.elements) {
    const auto it = classical.mesh.elements.find(id);
    identical = identical && it != classical.mesh.elements.end() &&
                it->second.vertices == p.vertices;
  }
  return {cnn.mesh.size() == 512 && boxes == 512 && identical,
          std::to_string(cnn.mesh.size()) + " elements, " + std::to_string(boxes) +
              " axis-aligned boxes, " + (identical ? "identical to" : "DIFFERENT from") +
              " classical:cube"};
}

// ---- 1: volume conservation ----

Outcome volume_conservation(Context& ctx) {
  const CnnClassifier classifier(*ctx.model);
  const auto start = Clock::now();
  double worst = 0.0;
  std::string sizes;
  for (const auto& g : kDeskGrids) {
    const Mesh grid = desk_grid(g);
    const double before = total_volume(grid);
    for (Strategy s : kCompared) {
      RefineConfig cfg;
      cfg.strategy = s;
      DriverResult d = uniform_refine(grid, cfg, 3, &classifier);
      worst = std::max(worst, std::abs(total_volume(d.mesh) - before) / before);
      sizes += std::string(sizes.empty() ? "" : " ") + std::to_string(d.mesh.size());
      ctx.uniform.emplace(std::make_pair(g.kind, s), std::move(d));
    }
  }
  ctx.uniform_seconds = seconds_since(start);
  return {worst <= 1e-6 && ctx.uniform_seconds < 600.0,
          fmt("max relative volume error %.2e", worst) +
              fmt(" in %.0f s; elements ", ctx.uniform_seconds) + sizes};
}

// ---- 8: quality ordering ----

Outcome quality_ordering(const Context& ctx) {
  std::map<Strategy, QualityReport> q;
  for (Strategy s : kCompared) {
    const DriverResult& d = ctx.uniform.at({GridKind::kVoronoi, s});
    q[s] = quality_report(d.mesh, {});
  }
  const double cr_d = q[Strategy::kDiameter].mean_cr, cr_k = q[Strategy::kKMeans].mean_cr;
  const double uf_d = q[Strategy::kDiameter].mean_uf, uf_c = q[Strategy::kCnn].mean_uf;
  return {cr_k >= cr_d - 0.02 && uf_c >= uf_d - 0.02,
          fmt("mean CR diameter %.4f", cr_d) + fmt(", kmeans %.4f", cr_k) +
              fmt("; mean UF diameter %.4f", uf_d) + fmt(", cnn %.4f", uf_c)};
}

// ---- 9: complexity ordering ----

Outcome complexity_ordering(const Context& ctx) {
  const auto c = complexity_stats(ctx.uniform.at({GridKind::kCubes, Strategy::kCnn}).mesh);
  const auto d = complexity_stats(ctx.uniform.at({GridKind::kCubes, Strategy::kDiameter}).mesh);
  const auto row = [](const ComplexityStats& s) {
    return std::to_string(s.n_vertices) + "/" + std::to_string(s.n_edges) + "/" +
           std::to_string(s.n_faces);
  };
  return {c.n_vertices <= d.n_vertices && c.n_edges <= d.n_edges && c.n_faces <= d.n_faces,
          "V/E/F cnn " + row(c) + ", diameter " + row(d)};
}

// ---- 10: adaptive concentration ----

Outcome adaptive_concentration(const Context& ctx) {
  const CnnClassifier classifier(*ctx.model);
  const Mesh grid = desk_grid({GridKind::kCubes, 4});
  bool counts_ok = true;
  double worst_ratio = 1e300;
  std::string detail;
  for (Strategy s : kCompared) {
    RefineConfig cfg;
    cfg.strategy = s;
    const DriverResult d =
        adaptive_refine(grid, cfg, boundary_layer_field, 0.4, 3, &classifier);
    for (const auto& step : d.steps) {
      counts_ok &= step.marked == static_cast<std::size_t>(
                                      std::ceil(0.4 * static_cast<double>(step.elements_before) - 1e-9));
    }
    int near0 = 0, near1 = 0;
    for (const auto& [id, p] : d.mesh.elements) {
      const double x = centroid(p).x();
      near0 += x < 0.25;
      near1 += x > 0.75;
    }
    const double ratio = near1 > 0 ? double(near0) / near1 : 1e300;
    worst_ratio = std::min(worst_ratio, ratio);
    detail += std::string(detail.empty() ? "" : ", ") + to_string(s) + " " +
              std::to_string(near0) + ":" + std::to_string(near1);
  }
  return {counts_ok && worst_ratio >= 2.0,
          "slab counts x<0.25 : x>0.75 " + detail + fmt("; worst ratio %.2f", worst_ratio) +
              (counts_ok ? "; marked counts exact" : "; marked counts WRONG")};
}

// ---- 12: determinism of the CLI pipelines ----

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome determinism(const Context& ctx) {
  std::vector<fs::path> roots;
  for (const char* name : {"run_a", "run_b"}) {
    const fs::path root = ctx.work / "determinism" / name;
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cli = ctx.cli + " --seed 7";
    const std::string r = root.string();
    const std::vector<std::string> steps{
        cli + " --out " + r + "/grid gen-grid --kind voronoi --resolution 24",
        cli + " --out " + r + "/refine refine --mesh " + r +
            "/grid/mesh.json --strategy kmeans --steps 2",
        cli + " --out " + r + "/metrics metrics --mesh " + r + "/refine/refined.json",
        cli + " --out " + r + "/adaptive refine --mesh " + r +
            "/grid/mesh.json --adaptive --r 0.4 --steps 2 --strategy diameter",
        cli + " --out " + r + "/data gen-dataset --per-shape 30 --other 30",
        cli + " --out " + r + "/train train --dataset " + r + "/data/dataset.bin --epochs 2",
        cli + " --out " + r + "/classify classify --mesh " + r +
            "/grid/mesh.json --model " + r + "/train/model.bin",
        cli + " --out " + r + "/cnn refine --mesh " + r + "/grid/mesh.json --strategy cnn " +
            "--steps 1 --model " + r + "/train/model.bin",
        cli + " --out " + r + "/fig9 reproduce fig9 --grids cubes tetrahedra --strategies " +
            "diameter cnn --steps 1 --model " + r + "/train/model.bin",
    };
    for (const auto& s : steps) {
      const int rc = run(s);
      if (rc != 0) return {false, "pipeline step failed (exit " + std::to_string(rc) + "): " + s};
    }
    roots.push_back(root);
  }
  int compared = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(roots[0])) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext != ".csv" && entry.path().filename() != "refined.json") continue;
    const fs::path other = roots[1] / fs::relative(entry.path(), roots[0]);
    ++compared;
    if (!fs::exists(other) || read_file(entry.path().string()) != read_file(other.string())) {
      ++differing;
    }
  }
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " artifacts compared, " + std::to_string(differing) +
              " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.cli = POLYREFINE_CLI_PATH;
  ctx.work = fs::current_path() / "acceptance_work";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--model" && i + 1 < argc) {
      ctx.model_path = argv[++i];
    } else if (a == "--cli" && i + 1 < argc) {
      ctx.cli = argv[++i];
    } else if (a == "--work" && i + 1 < argc) {
      ctx.work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      std::string item;
      while (std::getline(s, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: %s [--model PATH] [--cli PATH] [--work DIR] [--only 1,2]\n",
                   argv[0]);
      return 2;
    }
  }
  fs::create_directories(ctx.work);

  const std::map<int, std::string> titles{
      {1, "volume conservation, 3 uniform steps on five grids"},
      {2, "structure preservation on the cube grid"},
      {3, "child count and classical size contracts"},
      {4, "k-means plane on a 2x1x1 box"},
      {5, "gradient check against finite differences"},
      {6, "classifier accuracy on the desk dataset"},
      {7, "CVT cells classified as shapes"},
      {8, "quality ordering on the Voronoi grid"},
      {9, "complexity ordering on the cube grid"},
      {10, "adaptive concentration at the boundary layer"},
      {11, "validity of 1000 random refinements"},
      {12, "byte-identical pipeline re-runs"},
  };
  // Criteria that use the classifier or the shared uniform runs.
  const std::map<int, std::vector<int>> needs{{1, {6}}, {2, {6}}, {3, {6}}, {7, {6}},
                                              {8, {1, 6}}, {9, {1, 6}}, {10, {6}}, {11, {6}}};
  std::set<int> selected = only;
  if (selected.empty()) {
    for (const auto& [id, t] : titles) selected.insert(id);
  }
  std::set<int> required = selected;
  for (int id : selected) {
    if (needs.count(id)) required.insert(needs.at(id).begin(), needs.at(id).end());
  }

  std::map<int, Outcome> results;
  const auto attempt = [&](int id, const std::function<Outcome()>& body) {
    if (!required.count(id)) return;
    const auto start = Clock::now();
    try {
      results[id] = body();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
    std::fprintf(stderr, "criterion %d finished in %.1f s\n", id, seconds_since(start));
  };
  attempt(5, gradient_check);
  attempt(4, kmeans_box);
  attempt(6, [&] { return train_classifier(ctx); });
  const bool have_model = ctx.model.has_value();
  const auto with_model = [&](int id, const std::function<Outcome()>& body) {
    attempt(id, [&]() -> Outcome {
      if (!have_model) return {false, "no classifier available"};
      return body();
    });
  };
  with_model(3, [&] { return child_contracts(ctx); });
  with_model(11, [&] { return validity_suite(ctx); });
  with_model(7, [&] { return cvt_generalization(ctx); });
  with_model(2, [&] { return structure_preservation(ctx); });
  with_model(1, [&] { return volume_conservation(ctx); });
  const bool have_runs = !ctx.uniform.empty();
  for (int id : {8, 9}) {
    with_model(id, [&]() -> Outcome {
      if (!have_runs) return {false, "uniform runs unavailable"};
      return id == 8 ? quality_ordering(ctx) : complexity_ordering(ctx);
    });
  }
  with_model(10, [&] { return adaptive_concentration(ctx); });
  attempt(12, [&] { return determinism(ctx); });

  int failed = 0;
  for (int id : selected) {
    const Outcome& o = results[id];
    failed += !o.pass;
    std::printf("criterion %2d: %s  %s (%s)\n", id, o.pass ? "PASS" : "FAIL",
                titles.at(id).c_str(), o.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", selected.size(), failed);
  return failed == 0 ? 0 : 1;
}
