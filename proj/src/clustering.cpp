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

#include "polyrefine/clustering.hpp"

#include <cmath>

#include "polyrefine/error.hpp"
#include "polyrefine/random.hpp"

namespace polyrefine {

namespace {

int lattice_side(int n) {
  int m = static_cast<int>(std::lround(std::cbrt(static_cast<double>(n))));
  while (static_cast<long long>(m) * m * m < n) ++m;
  return std::max(m, 1);
}

double sse(const std::vector<Point3>& points, const std::vector<int>& assignment,
           const Point3& c1, const Point3& c2) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += (points[i] - (assignment[i] == 0 ? c1 : c2)).squaredNorm();
  }
  return total;
}

// Uniform rejection sample from the element; lattice points only as a last resort.
Point3 random_interior_point(const Polyhedron& p, const PointLocator& locator,
                             const std::vector<Point3>& points, Rng& rng) {
  const BoundingBox box = bounding_box(p);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Point3 q(rng.uniform(box.lo.x(), box.hi.x()), rng.uniform(box.lo.y(), box.hi.y()),
                   rng.uniform(box.lo.z(), box.hi.z()));
    if (locator.contains(q)) return q;
  }
  return points[rng.below(points.size())];
}

}  // namespace

std::vector<Point3> interior_grid_points(const Polyhedron& p, int n) {
  const int m = lattice_side(n);
  const BoundingBox box = bounding_box(p);
  const Vec3 step = box.extent() / m;
  const PointLocator locator(p);
  std::vector<Point3> points;
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const Point3 q = box.lo + Vec3((i + 0.5) * step.x(), (j + 0.5) * step.y(),
                                       (k + 0.5) * step.z());
        if (locator.contains(q)) points.push_back(q);
      }
    }
  }
  if (points.size() < 2) {
    throw Error(ErrorCode::kResolutionTooCoarse,
                "fewer than 2 lattice points inside the element");
  }
  return points;
}

KMeansResult two_means(const std::vector<Point3>& points, Point3 c1, Point3 c2,
                       int max_iterations) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kResolutionTooCoarse, "2-means needs 2 points");
  }
  KMeansResult r;
  std::vector<int>& label = r.assignment;
  label.assign(points.size(), -1);
  std::size_t prev1 = 0, prev2 = 0;
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    std::size_t n2 = 0;
    // Equidistant points join the smaller cluster, which strictly lowers the objective.
    const int tie_label = prev2 < prev1 ? 1 : 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d1 = (points[i] - c1).squaredNorm();
      const double d2 = (points[i] - c2).squaredNorm();
      const int l = std::abs(d1 - d2) <= 1e-12 * (d1 + d2) ? tie_label : d2 < d1;
      changed |= l != label[i];
      label[i] = l;
      n2 += l;
    }
    if (n2 == 0 || n2 == points.size()) {
      // Re-seed the empty cluster at the point farthest from the other one.
      const int empty = n2 == 0 ? 1 : 0;
      const Point3& other = empty == 1 ? c1 : c2;
      std::size_t far = 0;
      for (std::size_t i = 1; i < points.size(); ++i) {
        if ((points[i] - other).squaredNorm() >
            (points[far] - other).squaredNorm()) {
          far = i;
        }
      }
      (empty == 1 ? c2 : c1) = points[far];
      ++r.reseeds;
      if (r.reseeds > 2) break;
      std::fill(label.begin(), label.end(), -1);
      --it;
      continue;
    }
    if (!changed) break;
    Point3 s1 = Point3::Zero(), s2 = Point3::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) {
      (label[i] == 0 ? s1 : s2) += points[i];
    }
    prev1 = points.size() - n2;
    prev2 = n2;
    c1 = s1 / static_cast<double>(points.size() - n2);
    c2 = s2 / static_cast<double>(n2);
    r.iterations = it + 1;
    r.objective.push_back(sse(points, label, c1, c2));
  }
  r.c1 = c1;
  r.c2 = c2;
  for (int l : label) (l == 0 ? r.n1 : r.n2)++;
  if ((c2 - c1).norm() == 0.0) {
    throw Error(ErrorCode::kDegenerateElement, "2-means centroids coincide");
  }
  r.plane = CuttingPlane::make(0.5 * (c1 + c2), c2 - c1);
  return r;
}

KMeansResult kmeans_cutting_plane(const Polyhedron& p, const KMeansConfig& cfg) {
  std::vector<Point3> points;
  try {
    points = interior_grid_points(p, cfg.n_grid_points);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kResolutionTooCoarse) throw;
    points = interior_grid_points(p, 8 * cfg.n_grid_points);
  }
  Point3 c1, c2;
  if (cfg.deterministic_init) {
    std::size_t a = 0, b = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const double d = (points[i] - points[j]).squaredNorm();
        if (d > best) {
          best = d;
          a = i;
          b = j;
        }
      }
    }
    c1 = points[a];
    c2 = points[b];
  } else {
    Rng rng(cfg.rng_seed);
    const PointLocator locator(p);
    c1 = random_interior_point(p, locator, points, rng);
    c2 = random_interior_point(p, locator, points, rng);
  }
  return two_means(points, c1, c2, cfg.max_iterations);
}

}  // namespace polyrefine
