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

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "polyrefine/error.hpp"
#include "polyrefine/geometry.hpp"

namespace polyrefine {

namespace {

struct HullFace {
  std::array<int, 3> v;
  Vec3 normal;
  double offset = 0.0;
  std::vector<int> outside;
  bool alive = true;
};

class QuickHull {
 public:
  explicit QuickHull(const std::vector<Point3>& points) : pts_(points) {
    BoundingBox box{points.front(), points.front()};
    for (const auto& p : points) {
      box.lo = box.lo.cwiseMin(p);
      box.hi = box.hi.cwiseMax(p);
    }
    const double scale =
        std::max(box.extent().norm(), box.hi.cwiseAbs().maxCoeff());
    eps_ = 1e-11 * std::max(scale, 1e-300);
  }

  Polyhedron run() {
    seed_simplex();
    for (;;) {
      int pick = -1;
      for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (faces_[f].alive && !faces_[f].outside.empty()) {
          pick = static_cast<int>(f);
          break;
        }
      }
      if (pick < 0) break;
      add_point(pick);
    }
    return extract();
  }

 private:
  double dist(const HullFace& f, int i) const {
    return f.normal.dot(pts_[i]) - f.offset;
  }

  int make_face(int a, int b, int c) {
    HullFace f;
    f.v = {a, b, c};
    const Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    f.normal = n.normalized();
    f.offset = f.normal.dot(pts_[a]);
    faces_.push_back(std::move(f));
    const int id = static_cast<int>(faces_.size()) - 1;
    for (int k = 0; k < 3; ++k) {
      edge_owner_[{faces_[id].v[k], faces_[id].v[(k + 1) % 3]}] = id;
    }
    return id;
  }

  void seed_simplex() {
    const int n = static_cast<int>(pts_.size());
    if (n < 4) {
      throw Error(ErrorCode::kDegenerateHull, "convex hull needs 4 points");
    }
    // Extreme points along the axes, then the widest pair among them.
    std::vector<int> extremes;
    for (int axis = 0; axis < 3; ++axis) {
      int lo = 0, hi = 0;
      for (int i = 1; i < n; ++i) {
        if (pts_[i][axis] < pts_[lo][axis]) lo = i;
        if (pts_[i][axis] > pts_[hi][axis]) hi = i;
      }
      extremes.push_back(lo);
      extremes.push_back(hi);
    }
    int i0 = extremes[0], i1 = extremes[1];
    double best = -1.0;
    for (int a : extremes) {
      for (int b : extremes) {
        const double d = (pts_[a] - pts_[b]).squaredNorm();
        if (d > best) {
          best = d;
          i0 = a;
          i1 = b;
        }
      }
    }
    if (std::sqrt(best) <= eps_) {
      throw Error(ErrorCode::kDegenerateHull, "coincident hull input");
    }
    const Vec3 axis = (pts_[i1] - pts_[i0]).normalized();
    int i2 = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const Vec3 r = pts_[i] - pts_[i0];
      const double d = (r - r.dot(axis) * axis).norm();
      if (d > best) {
        best = d;
        i2 = i;
      }
    }
    if (i2 < 0) {
      throw Error(ErrorCode::kDegenerateHull, "collinear hull input");
    }
    const Vec3 n012 =
        (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    int i3 = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(n012.dot(pts_[i] - pts_[i0]));
      if (d > best) {
        best = d;
        i3 = i;
      }
    }
    if (i3 < 0) {
      throw Error(ErrorCode::kDegenerateHull, "coplanar hull input");
    }
    if (n012.dot(pts_[i3] - pts_[i0]) > 0.0) std::swap(i1, i2);
    make_face(i0, i1, i2);
    make_face(i0, i3, i1);
    make_face(i1, i3, i2);
    make_face(i2, i3, i0);

    for (int i = 0; i < n; ++i) {
      if (i == i0 || i == i1 || i == i2 || i == i3) continue;
      assign(i, {0, 1, 2, 3});
    }
  }

  void assign(int point, const std::vector<int>& candidates) {
    int best_face = -1;
    double best = eps_;
    for (int f : candidates) {
      const double d = dist(faces_[f], point);
      if (d > best) {
        best = d;
        best_face = f;
      }
    }
    if (best_face >= 0) faces_[best_face].outside.push_back(point);
  }

  void add_point(int face_id) {
    const auto& out = faces_[face_id].outside;
    int eye = out.front();
    double far = dist(faces_[face_id], eye);
    for (int i : out) {
      const double d = dist(faces_[face_id], i);
      if (d > far) {
        far = d;
        eye = i;
      }
    }

    // Faces visible from the eye, grown through edge adjacency.
    std::vector<int> visible{face_id};
    std::vector<char> is_visible(faces_.size(), 0);
    is_visible[face_id] = 1;
    for (std::size_t q = 0; q < visible.size(); ++q) {
      const HullFace& f = faces_[visible[q]];
      for (int k = 0; k < 3; ++k) {
        const int nb = edge_owner_.at({f.v[(k + 1) % 3], f.v[k]});
        if (!is_visible[nb] && dist(faces_[nb], eye) > eps_) {
          is_visible[nb] = 1;
          visible.push_back(nb);
        }
      }
    }

    std::vector<std::pair<int, int>> horizon;
    std::vector<int> orphans;
    for (int fid : visible) {
      HullFace& f = faces_[fid];
      for (int k = 0; k < 3; ++k) {
        const int a = f.v[k];
        const int b = f.v[(k + 1) % 3];
        const int nb = edge_owner_.at({b, a});
        if (!is_visible[nb]) horizon.emplace_back(a, b);
      }
      for (int i : f.outside) {
        if (i != eye) orphans.push_back(i);
      }
      f.outside.clear();
      f.alive = false;
    }
    for (int fid : visible) {
      const HullFace& f = faces_[fid];
      for (int k = 0; k < 3; ++k) {
        const auto it = edge_owner_.find({f.v[k], f.v[(k + 1) % 3]});
        if (it != edge_owner_.end() && it->second == fid) edge_owner_.erase(it);
      }
    }
    std::vector<int> created;
    for (const auto& [a, b] : horizon) created.push_back(make_face(a, b, eye));
    std::sort(orphans.begin(), orphans.end());
    for (int i : orphans) assign(i, created);
  }

  Polyhedron extract() const {
    Polyhedron hull;
    std::map<int, int> remap;
    for (const auto& f : faces_) {
      if (!f.alive) continue;
      for (int v : f.v) remap.emplace(v, 0);
    }
    for (auto& [old_index, new_index] : remap) {
      new_index = static_cast<int>(hull.vertices.size());
      hull.vertices.push_back(pts_[old_index]);
    }
    for (const auto& f : faces_) {
      if (!f.alive) continue;
      hull.faces.push_back({{remap.at(f.v[0]), remap.at(f.v[1]),
                             remap.at(f.v[2])}});
    }
    return hull;
  }

  const std::vector<Point3>& pts_;
  std::vector<HullFace> faces_;
  std::map<std::pair<int, int>, int> edge_owner_;
  double eps_ = 0.0;
};

}  // namespace

Polyhedron convex_hull(const std::vector<Point3>& points) {
  if (points.size() < 4) {
    throw Error(ErrorCode::kDegenerateHull, "convex hull needs 4 points");
  }
  for (const auto& p : points) {
    if (!p.allFinite()) {
      throw Error(ErrorCode::kMalformedInput, "non-finite hull input");
    }
  }
  return QuickHull(points).run();
}

}  // namespace polyrefine
