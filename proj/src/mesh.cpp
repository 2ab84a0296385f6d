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

#include "polyrefine/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "polyrefine/error.hpp"

namespace polyrefine {

ElementId Mesh::add(Polyhedron p, ElementId parent_id) {
  const ElementId id = next_id++;
  p.id = id;
  elements.emplace(id, std::move(p));
  if (parent_id != kNoElement) parent.emplace(id, parent_id);
  return id;
}

void RefineTimings::record(const std::string& strategy, double seconds) {
  total_seconds += seconds;
  ++elements_refined;
  seconds_by_strategy[strategy] += seconds;
}

double mesh_size(const Mesh& m) {
  if (m.empty()) throw Error(ErrorCode::kMalformedInput, "empty mesh");
  double h = 0.0;
  for (const auto& [id, p] : m.elements) h = std::max(h, diameter(p));
  return h;
}

double total_volume(const Mesh& m) {
  double v = 0.0;
  for (const auto& [id, p] : m.elements) v += volume(p);
  return v;
}

std::vector<ElementId> replace_element(Mesh& m, ElementId id,
                                       std::vector<Polyhedron> children) {
  const auto it = m.elements.find(id);
  if (it == m.elements.end()) {
    throw Error(ErrorCode::kMalformedInput,
                "no element with id " + std::to_string(id));
  }
  const double parent_volume = volume(it->second);
  double sum = 0.0;
  for (const auto& c : children) sum += volume(c);
  if (children.empty() ||
      std::abs(sum - parent_volume) > 1e-9 * parent_volume) {
    throw Error(ErrorCode::kRefinementRejected,
                "children do not conserve the volume of element " +
                    std::to_string(id));
  }
  m.elements.erase(it);
  std::vector<ElementId> ids;
  ids.reserve(children.size());
  for (auto& c : children) ids.push_back(m.add(std::move(c), id));
  return ids;
}

std::size_t VertexWelder::KeyHash::operator()(
    const std::array<long long, 3>& k) const {
  std::size_t h = 1469598103934665603ULL;
  for (long long v : k) {
    h ^= static_cast<std::size_t>(v) + 0x9E3779B97F4A7C15ULL + (h << 6) +
         (h >> 2);
  }
  return h;
}

std::array<long long, 3> VertexWelder::cell(const Point3& p) const {
  const double size = 4.0 * tol_;
  return {static_cast<long long>(std::floor(p.x() / size)),
          static_cast<long long>(std::floor(p.y() / size)),
          static_cast<long long>(std::floor(p.z() / size))};
}

int VertexWelder::insert(const Point3& p) {
  const auto c = cell(p);
  for (long long dx = -1; dx <= 1; ++dx) {
    for (long long dy = -1; dy <= 1; ++dy) {
      for (long long dz = -1; dz <= 1; ++dz) {
        const auto it = buckets_.find({c[0] + dx, c[1] + dy, c[2] + dz});
        if (it == buckets_.end()) continue;
        for (int idx : it->second) {
          if ((points_[idx] - p).cwiseAbs().maxCoeff() <= tol_) return idx;
        }
      }
    }
  }
  const int idx = static_cast<int>(points_.size());
  points_.push_back(p);
  buckets_[c].push_back(idx);
  return idx;
}

ComplexityStats complexity_stats(const Mesh& m, const RefineTimings& timings) {
  VertexWelder welder;
  std::set<std::pair<int, int>> edges;
  std::set<std::vector<int>> faces;
  for (const auto& [id, p] : m.elements) {
    std::vector<int> global(p.vertices.size());
    for (std::size_t i = 0; i < p.vertices.size(); ++i) {
      global[i] = welder.insert(p.vertices[i]);
    }
    for (const auto& f : p.faces) {
      std::vector<int> key;
      for (std::size_t i = 0; i < f.loop.size(); ++i) {
        const int a = global[f.loop[i]];
        const int b = global[f.loop[(i + 1) % f.loop.size()]];
        edges.emplace(std::min(a, b), std::max(a, b));
        key.push_back(a);
      }
      std::sort(key.begin(), key.end());
      faces.insert(std::move(key));
    }
  }
  ComplexityStats s;
  s.n_vertices = welder.points().size();
  s.n_edges = edges.size();
  s.n_faces = faces.size();
  s.n_elements = m.size();
  s.total_refine_time = timings.total_seconds;
  s.mean_time_per_element =
      timings.elements_refined > 0
          ? timings.total_seconds / static_cast<double>(timings.elements_refined)
          : 0.0;
  return s;
}

}  // namespace polyrefine
