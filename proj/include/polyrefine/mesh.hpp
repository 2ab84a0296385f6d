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

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "polyrefine/geometry.hpp"

namespace polyrefine {

struct Mesh {
  std::map<ElementId, Polyhedron> elements;
  std::map<ElementId, ElementId> parent;  // provenance of refined elements
  BoundingBox domain{Point3::Zero(), Point3::Ones()};
  int generation = 0;
  ElementId next_id = 0;

  // Stores p under a fresh id and returns that id.
  ElementId add(Polyhedron p, ElementId parent_id = kNoElement);
  std::size_t size() const { return elements.size(); }
  bool empty() const { return elements.empty(); }
};

struct RefineTimings {
  double total_seconds = 0.0;
  std::size_t elements_refined = 0;
  std::map<std::string, double> seconds_by_strategy;

  void record(const std::string& strategy, double seconds);
};

struct ComplexityStats {
  std::size_t n_vertices = 0;
  std::size_t n_edges = 0;
  std::size_t n_faces = 0;
  std::size_t n_elements = 0;
  double total_refine_time = 0.0;
  double mean_time_per_element = 0.0;
};

double mesh_size(const Mesh& m);
double total_volume(const Mesh& m);

// Replaces element `id` by `children`; neighbors are left untouched.
std::vector<ElementId> replace_element(Mesh& m, ElementId id,
                                       std::vector<Polyhedron> children);

ComplexityStats complexity_stats(const Mesh& m,
                                 const RefineTimings& timings = {});

// Merges points closer than `tol` (per coordinate) into shared indices.
class VertexWelder {
 public:
  explicit VertexWelder(double tol = 1e-9) : tol_(tol) {}

  int insert(const Point3& p);
  const std::vector<Point3>& points() const { return points_; }

 private:
  struct KeyHash {
    std::size_t operator()(const std::array<long long, 3>& k) const;
  };
  std::array<long long, 3> cell(const Point3& p) const;

  double tol_;
  std::vector<Point3> points_;
  std::unordered_map<std::array<long long, 3>, std::vector<int>, KeyHash>
      buckets_;
};

}  // namespace polyrefine
