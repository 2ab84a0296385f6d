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

#include "polyrefine/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "polyrefine/error.hpp"

namespace polyrefine {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedInput: return "malformed input";
    case ErrorCode::kDegenerateElement: return "degenerate element";
    case ErrorCode::kOrientation: return "inconsistent orientation";
    case ErrorCode::kDegenerateHull: return "degenerate hull";
    case ErrorCode::kNoCut: return "plane does not cut the element";
    case ErrorCode::kResolutionTooCoarse: return "resolution too coarse";
    case ErrorCode::kShape: return "shape mismatch";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kRefinementRejected: return "refinement rejected";
    case ErrorCode::kUnrefinable: return "element unrefinable";
    case ErrorCode::kDegenerateReference: return "degenerate reference shape";
    case ErrorCode::kReseed: return "duplicate seeds";
    case ErrorCode::kEmptySplit: return "empty split";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kUsage: return "usage error";
  }
  return "unknown error";
}

CuttingPlane CuttingPlane::make(const Point3& origin, const Vec3& normal) {
  const double n = normal.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kMalformedInput, "cutting plane with zero normal");
  }
  return CuttingPlane{origin, normal / n};
}

std::optional<CuttingPlane> CuttingPlane::through(const Point3& a,
                                                  const Point3& b,
                                                  const Point3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double scale = std::max({(b - a).norm(), (c - a).norm(), 1e-300});
  if (n.norm() <= 1e-14 * scale * scale) return std::nullopt;
  return CuttingPlane{a, n.normalized()};
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

Polyhedron make_box(const Point3& lo, const Point3& hi) {
  Polyhedron p;
  for (int k = 0; k < 8; ++k) {
    p.vertices.emplace_back((k & 1) ? hi.x() : lo.x(), (k & 2) ? hi.y() : lo.y(),
                            (k & 4) ? hi.z() : lo.z());
  }
  // Corner k has bits (x, y, z).
  p.faces = {{{0, 4, 6, 2}},   // x = lo
             {{1, 3, 7, 5}},   // x = hi
             {{0, 1, 5, 4}},   // y = lo
             {{2, 6, 7, 3}},   // y = hi
             {{0, 2, 3, 1}},   // z = lo
             {{4, 5, 7, 6}}};  // z = hi
  return p;
}

Polyhedron make_tetrahedron(const Point3& a, const Point3& b, const Point3& c,
                            const Point3& d) {
  Polyhedron p;
  p.vertices = {a, b, c, d};
  p.faces = {{{0, 2, 1}}, {{0, 1, 3}}, {{1, 2, 3}}, {{0, 3, 2}}};
  if (signed_volume(p) < 0.0) flip_orientation(p);
  return p;
}

Polyhedron make_prism(const Point3& a, const Point3& b, const Point3& c,
                      const Vec3& offset) {
  Polyhedron p;
  p.vertices = {a, b, c, a + offset, b + offset, c + offset};
  p.faces = {{{0, 2, 1}},     {{3, 4, 5}},     {{0, 1, 4, 3}},
             {{1, 2, 5, 4}}, {{2, 0, 3, 5}}};
  if (signed_volume(p) < 0.0) flip_orientation(p);
  return p;
}

Polyhedron make_regular_tetrahedron(double edge) {
  const double s = edge / std::sqrt(8.0);
  return make_tetrahedron(Point3(s, s, s), Point3(s, -s, -s),
                          Point3(-s, s, -s), Point3(-s, -s, s));
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

BoundingBox bounding_box(const Polyhedron& p) {
  if (p.vertices.empty()) {
    throw Error(ErrorCode::kMalformedInput, "bounding box of empty polyhedron");
  }
  BoundingBox box{p.vertices.front(), p.vertices.front()};
  for (const auto& v : p.vertices) {
    box.lo = box.lo.cwiseMin(v);
    box.hi = box.hi.cwiseMax(v);
  }
  return box;
}

Diameter diameter_pair(const Polyhedron& p) {
  const int n = static_cast<int>(p.vertices.size());
  if (n < 2) {
    throw Error(ErrorCode::kMalformedInput,
                "diameter needs at least two vertices");
  }
  Diameter best;
  double best_sq = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (p.vertices[i] - p.vertices[j]).squaredNorm();
      if (d > best_sq) {
        best_sq = d;
        best.first = i;
        best.second = j;
      }
    }
  }
  best.length = std::sqrt(best_sq);
  return best;
}

double diameter(const Polyhedron& p) { return diameter_pair(p).length; }

Vec3 face_area_vector(const Polyhedron& p, const PolyFace& f) {
  Vec3 n = Vec3::Zero();
  const std::size_t k = f.loop.size();
  if (k < 3) return n;
  const Point3& o = p.vertices[f.loop[0]];
  for (std::size_t i = 1; i + 1 < k; ++i) {
    n += (p.vertices[f.loop[i]] - o).cross(p.vertices[f.loop[i + 1]] - o);
  }
  return 0.5 * n;
}

Vec3 face_normal(const Polyhedron& p, const PolyFace& f) {
  const Vec3 a = face_area_vector(p, f);
  const double n = a.norm();
  return n > 0.0 ? Vec3(a / n) : Vec3::Zero();
}

double face_area(const Polyhedron& p, const PolyFace& f) {
  return face_area_vector(p, f).norm();
}

namespace {

// Sum of signed tetrahedra (o, v0, vi, vi+1) over fan-triangulated faces.
// Returns 6 * volume and 24 * volume * centroid.
std::pair<double, Vec3> volume_moments(const Polyhedron& p) {
  const Point3 o = p.vertices.empty() ? Point3::Zero() : p.vertices.front();
  double six_vol = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const auto& f : p.faces) {
    const std::size_t k = f.loop.size();
    if (k < 3) continue;
    const Vec3 a = p.vertices[f.loop[0]] - o;
    for (std::size_t i = 1; i + 1 < k; ++i) {
      const Vec3 b = p.vertices[f.loop[i]] - o;
      const Vec3 c = p.vertices[f.loop[i + 1]] - o;
      const double v = a.dot(b.cross(c));
      six_vol += v;
      moment += v * (a + b + c);
    }
  }
  return {six_vol, moment};
}

}  // namespace

double signed_volume(const Polyhedron& p) {
  return volume_moments(p).first / 6.0;
}

double volume(const Polyhedron& p) {
  const TopologyReport topo = check_topology(p);
  if (!topo.faces_valid || !topo.oriented) {
    throw Error(ErrorCode::kOrientation,
                "volume of a polyhedron with inconsistent orientation");
  }
  const double v = signed_volume(p);
  if (v < 0.0) {
    throw Error(ErrorCode::kOrientation, "polyhedron faces point inward");
  }
  return v;
}

Point3 centroid(const Polyhedron& p) {
  const auto [six_vol, moment] = volume_moments(p);
  const BoundingBox box = bounding_box(p);
  const double scale = box.extent().maxCoeff();
  if (!(std::abs(six_vol) > 1e-14 * scale * scale * scale)) {
    throw Error(ErrorCode::kDegenerateElement, "centroid of zero-volume element");
  }
  return p.vertices.front() + moment / (4.0 * six_vol);
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

TopologyReport check_topology(const Polyhedron& p) {
  TopologyReport r;
  const int nv = static_cast<int>(p.vertices.size());
  std::map<std::pair<int, int>, int> directed;
  std::vector<char> used(nv, 0);
  for (const auto& f : p.faces) {
    const std::size_t k = f.loop.size();
    std::set<int> distinct(f.loop.begin(), f.loop.end());
    if (k < 3 || distinct.size() != k) r.faces_valid = false;
    for (std::size_t i = 0; i < k; ++i) {
      const int a = f.loop[i];
      const int b = f.loop[(i + 1) % k];
      if (a < 0 || a >= nv || b < 0 || b >= nv) {
        r.faces_valid = false;
        continue;
      }
      used[a] = 1;
      ++directed[{a, b}];
    }
  }
  r.faces = static_cast<int>(p.faces.size());
  r.vertices = static_cast<int>(std::count(used.begin(), used.end(), 1));

  std::map<std::pair<int, int>, int> undirected;
  for (const auto& [e, count] : directed) {
    if (count != 1) r.oriented = false;
    undirected[{std::min(e.first, e.second), std::max(e.first, e.second)}] +=
        count;
  }
  for (const auto& [e, count] : undirected) {
    if (count != 2) r.watertight = false;
    const auto ab = directed.find(e);
    const auto ba = directed.find({e.second, e.first});
    if (ab == directed.end() || ba == directed.end()) r.oriented = false;
  }
  r.edges = static_cast<int>(undirected.size());
  r.euler = r.vertices - r.edges + r.faces;

  // Faces connected through shared edges.
  std::vector<int> parent(p.faces.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<std::pair<int, int>, int> owner;
  for (std::size_t fi = 0; fi < p.faces.size(); ++fi) {
    const auto& loop = p.faces[fi].loop;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i];
      const int b = loop[(i + 1) % loop.size()];
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      const auto [it, inserted] = owner.emplace(key, static_cast<int>(fi));
      if (!inserted) parent[find(static_cast<int>(fi))] = find(it->second);
    }
  }
  std::set<int> roots;
  for (std::size_t fi = 0; fi < p.faces.size(); ++fi) {
    roots.insert(find(static_cast<int>(fi)));
  }
  r.components = static_cast<int>(roots.size());
  return r;
}

bool is_valid(const Polyhedron& p) {
  for (const auto& v : p.vertices) {
    if (!v.allFinite()) return false;
  }
  if (!check_topology(p).closed_genus0()) return false;
  return signed_volume(p) > 0.0;
}

bool is_convex(const Polyhedron& p, double rel_tol) {
  if (p.vertices.size() < 4) return false;
  const double tol = rel_tol * bounding_box(p).extent().norm();
  for (const auto& f : p.faces) {
    const Vec3 n = face_normal(p, f);
    const double offset = n.dot(p.vertices[f.loop[0]]);
    for (const auto& v : p.vertices) {
      if (n.dot(v) - offset > tol) return false;
    }
  }
  return true;
}

int count_edges(const Polyhedron& p) {
  std::set<std::pair<int, int>> edges;
  for (const auto& f : p.faces) {
    for (std::size_t i = 0; i < f.loop.size(); ++i) {
      const int a = f.loop[i];
      const int b = f.loop[(i + 1) % f.loop.size()];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return static_cast<int>(edges.size());
}

// ---------------------------------------------------------------------------
// Feature sizes
// ---------------------------------------------------------------------------

double min_edge_length(const Polyhedron& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : p.faces) {
    for (std::size_t i = 0; i < f.loop.size(); ++i) {
      const Point3& a = p.vertices[f.loop[i]];
      const Point3& b = p.vertices[f.loop[(i + 1) % f.loop.size()]];
      best = std::min(best, (a - b).norm());
    }
  }
  return best;
}

bool small_feature_check(const Polyhedron& p, double threshold) {
  if (min_edge_length(p) < threshold) return false;
  for (const auto& f : p.faces) {
    if (face_area(p, f) < threshold * threshold) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

void flip_orientation(Polyhedron& p) {
  for (auto& f : p.faces) std::reverse(f.loop.begin(), f.loop.end());
}

Polyhedron transformed(const Polyhedron& p, const Eigen::Matrix3d& linear,
                       const Vec3& translation) {
  Polyhedron q = p;
  for (auto& v : q.vertices) v = linear * v + translation;
  if (linear.determinant() < 0.0) flip_orientation(q);
  return q;
}

}  // namespace polyrefine
