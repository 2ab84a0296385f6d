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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "polyrefine/clustering.hpp"
#include "polyrefine/cnn.hpp"
#include "polyrefine/geometry.hpp"
#include "polyrefine/labels.hpp"
#include "polyrefine/mesh.hpp"
#include "polyrefine/random.hpp"

namespace polyrefine {

enum class Strategy {
  kDiameter,
  kKMeans,
  kCnn,
  kClassicalTet,
  kClassicalPrism,
  kClassicalCube,
};

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct RefineConfig {
  Strategy strategy = Strategy::kDiameter;
  // Per element: tol = tol_factor * diam(P) and target_h = target_factor *
  // diam(P), unless the absolute values below are positive.
  double tol_factor = 1e-3;
  double target_factor = 0.5;
  double tol = 0.0;
  double target_h = 0.0;
  int nmax = 8;
  int emergency_attempts = 50;
  double emergency_shift = 0.02;       // fraction of diam(P)
  double emergency_angle_deg = 5.0;
  int kmeans_grid_points = 20 * 20 * 20;
  int kmeans_max_iterations = 100;
  std::uint64_t rng_seed = 0;
};

struct ReferenceShape {
  std::vector<Point3> vertices;
  std::vector<PolyFace> faces;
  ShapeLabel shape_type = ShapeLabel::kCube;
  std::vector<int> picked;  // vertex indices in the source polyhedron
};

struct SnapResult {
  CuttingPlane plane;
  int near_vertices = 0;
  bool least_squares = false;
};

SnapResult snap_plane(const CuttingPlane& plane, const Polyhedron& p, double tol);

// Every child is a closed genus-0 surface with positive volume and passes
// small_feature_check(child, tol).
bool validity_check(const std::vector<Polyhedron>& children, double tol);

// Same as above, except that edges and faces inherited unchanged from
// `parent` are exempt from the size threshold.
bool validity_check(const Polyhedron& parent, const ClipResult& cut, double tol);

struct EmergencyResult {
  CuttingPlane plane;
  ClipResult cut;
  int attempts = 0;
};

// Throws kUnrefinable if no perturbed plane gives a valid cut.
EmergencyResult emergency_strategy(const Polyhedron& p, const CuttingPlane& plane,
                                   double tol, const RefineConfig& cfg, Rng& rng);

CuttingPlane diameter_plane(const Polyhedron& p);

// Throws kDegenerateReference if the picked vertices do not form the
// requested shape.
ReferenceShape reference_shape(const Polyhedron& p, ShapeLabel shape_type);

// A pattern plane cuts every current piece it crosses, or only the piece
// containing the anchor when one is set.
struct PatternPlane {
  CuttingPlane plane;
  std::optional<Point3> anchor;
};

std::vector<PatternPlane> classical_planes(const ReferenceShape& ref);

class ShapeClassifier {
 public:
  virtual ~ShapeClassifier() = default;
  virtual ShapeLabel classify(const Polyhedron& p) const = 0;
};

class CnnClassifier : public ShapeClassifier {
 public:
  explicit CnnClassifier(const CnnModel& model) : model_(model) {}
  ShapeLabel classify(const Polyhedron& p) const override;

 private:
  const CnnModel& model_;
};

struct ElementResult {
  std::vector<Polyhedron> children;
  std::optional<ShapeLabel> label;
  Strategy applied = Strategy::kDiameter;  // strategy that produced the cuts
  int cuts = 0;
  int emergency_attempts = 0;
  bool unrefinable = false;
  std::string note;
};

ElementResult refine_element(const Polyhedron& p, const RefineConfig& cfg,
                             const ShapeClassifier* classifier = nullptr);

// Algorithm-level entry points for the two plane sources.
ElementResult refine_with_pattern(const Polyhedron& p,
                                  const std::vector<PatternPlane>& planes,
                                  const RefineConfig& cfg, Rng& rng);
ElementResult refine_with_source(
    const Polyhedron& p,
    const std::function<CuttingPlane(const Polyhedron&, Rng&)>& source,
    const RefineConfig& cfg, Rng& rng);

ElementResult cnn_refine(const Polyhedron& p, const ShapeClassifier& classifier,
                         const RefineConfig& cfg);

using ScalarField = std::function<double(const Point3&)>;

double boundary_layer_field(const Point3& x);
ScalarField field_by_name(const std::string& name);

// sqrt(vol(P) * variance of u over a 5^3 interior sample lattice).
double error_indicator(const Polyhedron& p, const ScalarField& u);

struct RefineLogEntry {
  int step = 0;
  ElementId id = kNoElement;
  Strategy strategy = Strategy::kDiameter;
  std::optional<ShapeLabel> label;
  int children = 0;
  double seconds = 0.0;
  int emergency_attempts = 0;
  bool unrefinable = false;
};

struct StepSummary {
  int step = 0;
  std::size_t elements_before = 0;
  std::size_t marked = 0;
  std::size_t unrefinable = 0;
  std::size_t elements_after = 0;
  double mesh_size = 0.0;
  ComplexityStats stats;
};

struct DriverResult {
  Mesh mesh;
  std::vector<StepSummary> steps;
  std::vector<RefineLogEntry> log;
  RefineTimings timings;
  std::size_t unrefinable = 0;
  std::size_t attempted = 0;
};

DriverResult uniform_refine(Mesh mesh, const RefineConfig& cfg, int steps,
                            const ShapeClassifier* classifier = nullptr,
                            int threads = 1);

// Refines the ceil(r * N) elements with the largest error indicator per step,
// ties broken by element id.
DriverResult adaptive_refine(Mesh mesh, const RefineConfig& cfg,
                             const ScalarField& field, double r, int steps,
                             const ShapeClassifier* classifier = nullptr,
                             int threads = 1);

std::size_t marked_count(double r, std::size_t n);

}  // namespace polyrefine
