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
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "polyrefine/error.hpp"
#include "polyrefine/geometry.hpp"

namespace polyrefine {

namespace {

Eigen::Vector2d drop(const Point3& p, int axis) {
  switch (axis) {
    case 0: return {p.y(), p.z()};
    case 1: return {p.z(), p.x()};
    default: return {p.x(), p.y()};
  }
}

// Crossing-number test; `near_edge` is set when q is within eps of an edge.
bool inside_polygon(const std::vector<Eigen::Vector2d>& poly,
                    const Eigen::Vector2d& q, double eps, bool* near_edge) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[j];
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t =
        len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    if ((a + t * ab - q).norm() <= eps) *near_edge = true;
    if ((a.y() > q.y()) != (b.y() > q.y())) {
      const double x = a.x() + (q.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (q.x() < x) inside = !inside;
    }
  }
  return inside;
}

double segment_distance(const Point3& q, const Point3& a, const Point3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t =
      len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - q).norm();
}

}  // namespace

PointLocator::PointLocator(const Polyhedron& p, double boundary_tol)
    : tol_(boundary_tol) {
  const BoundingBox box = bounding_box(p);
  scale_ = std::max(box.extent().norm(), 1e-300);
  faces_.reserve(p.faces.size());
  for (const auto& f : p.faces) {
    FaceData d;
    d.normal = face_normal(p, f);
    d.offset = d.normal.dot(p.vertices[f.loop[0]]);
    d.normal.cwiseAbs().maxCoeff(&d.drop_axis);
    for (int v : f.loop) {
      d.polygon.push_back(drop(p.vertices[v], d.drop_axis));
      d.corners.push_back(p.vertices[v]);
    }
    faces_.push_back(std::move(d));
  }
  const double ctol = 1e-9 * scale_;
  for (const auto& d : faces_) {
    for (const auto& v : p.vertices) {
      if (d.normal.dot(v) - d.offset > ctol) {
        convex_ = false;
        break;
      }
    }
    if (!convex_) break;
  }
}

bool PointLocator::on_boundary(const Point3& q) const {
  for (const auto& f : faces_) {
    const double h = f.normal.dot(q) - f.offset;
    if (std::abs(h) > tol_) continue;
    bool near_edge = false;
    if (inside_polygon(f.polygon, drop(q, f.drop_axis), tol_, &near_edge) ||
        near_edge) {
      return true;
    }
  }
  return false;
}

std::optional<int> PointLocator::cast_parity(const Point3& q,
                                             const Vec3& dir) const {
  int crossings = 0;
  const double graze = 1e-10 * scale_;
  for (const auto& f : faces_) {
    const double denom = f.normal.dot(dir);
    const double h = f.offset - f.normal.dot(q);
    if (std::abs(denom) < 1e-9) {
      if (std::abs(h) <= graze) return std::nullopt;
      continue;
    }
    const double t = h / denom;
    if (t <= 0.0) continue;
    const Point3 hit = q + t * dir;
    bool near_edge = false;
    const bool in = inside_polygon(f.polygon, drop(hit, f.drop_axis), graze,
                                   &near_edge);
    if (near_edge) return std::nullopt;
    if (in) ++crossings;
  }
  return crossings;
}

bool PointLocator::contains(const Point3& q) const {
  if (convex_) {
    for (const auto& f : faces_) {
      if (f.normal.dot(q) - f.offset > tol_) return false;
    }
    return true;
  }
  if (on_boundary(q)) return true;
  static const std::array<Vec3, 6> kDirections = {
      Vec3(0.5773502691896258, 0.5773502691896258, 0.5773502691896258),
      Vec3(0.8017837257372732, -0.2672612419124244, 0.5345224838248488),
      Vec3(-0.3015113445777636, 0.9045340337332909, 0.3015113445777636),
      Vec3(0.2182178902359924, 0.4364357804719848, -0.8728715609439696),
      Vec3(-0.7071067811865476, -0.5, 0.5),
      Vec3(0.1240347345892084, -0.9922778767136677, -0.0),
  };
  for (const auto& base : kDirections) {
    const auto parity = cast_parity(q, base.normalized());
    if (parity) return (*parity % 2) == 1;
  }
  // All canned directions grazed; sweep deterministic irrational directions.
  for (int k = 1; k < 64; ++k) {
    const double phi = 2.399963229728653 * k;
    const double z = 1.0 - 2.0 * std::fmod(0.6180339887498949 * k, 1.0);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const auto parity =
        cast_parity(q, Vec3(r * std::cos(phi), r * std::sin(phi), z));
    if (parity) return (*parity % 2) == 1;
  }
  return false;
}

double PointLocator::distance_to_boundary(const Point3& q) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : faces_) {
    const double h = f.normal.dot(q) - f.offset;
    const Point3 foot = q - h * f.normal;
    bool near_edge = false;
    if (inside_polygon(f.polygon, drop(foot, f.drop_axis), 0.0, &near_edge)) {
      best = std::min(best, std::abs(h));
      continue;
    }
    const std::size_t n = f.corners.size();
    for (std::size_t i = 0; i < n; ++i) {
      best = std::min(best,
                      segment_distance(q, f.corners[i], f.corners[(i + 1) % n]));
    }
  }
  return best;
}

bool contains_point(const Polyhedron& p, const Point3& q) {
  return PointLocator(p).contains(q);
}

// ---------------------------------------------------------------------------
// Inscribed radius
// ---------------------------------------------------------------------------

namespace {

// Dense-tableau simplex for max c.z s.t. A z <= b, z >= 0 with b >= 0.
// Bland's rule; sizes here are a handful of columns and a few dozen rows.
double simplex_max(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  for (int iter = 0; iter < 10000; ++iter) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (t(m, j) < -1e-12) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t(i, enter) > 1e-12) {
        const double ratio = t(i, n + m) / t(i, enter);
        if (ratio < best - 1e-15 ||
            (ratio <= best + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      throw Error(ErrorCode::kDegenerateElement, "unbounded inscribed ball");
    }
    t.row(leave) /= t(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) {
        t.row(i) -= t(i, enter) * t.row(leave);
      }
    }
    basis[leave] = enter;
  }
  return t(m, n + m);
}

}  // namespace

double inscribed_radius(const Polyhedron& p) {
  const double vol = signed_volume(p);
  const BoundingBox box = bounding_box(p);
  const double ext = box.extent().maxCoeff();
  if (!(vol > 1e-14 * ext * ext * ext)) {
    throw Error(ErrorCode::kDegenerateElement,
                "inscribed radius of zero-volume element");
  }
  if (is_convex(p)) {
    // Chebyshev center: max r s.t. n_f.(c + u - w) + r <= d_f.
    const Point3 c = centroid(p);
    const int m = static_cast<int>(p.faces.size());
    Eigen::MatrixXd a(m, 7);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      const Vec3 n = face_normal(p, p.faces[i]);
      const double d = n.dot(p.vertices[p.faces[i].loop[0]]);
      a.block<1, 3>(i, 0) = n.transpose();
      a.block<1, 3>(i, 3) = -n.transpose();
      a(i, 6) = 1.0;
      b(i) = std::max(0.0, d - n.dot(c));
    }
    Eigen::VectorXd obj = Eigen::VectorXd::Zero(7);
    obj(6) = 1.0;
    return simplex_max(a, b, obj);
  }
  // Non-convex: best interior sample of a 20^3 lattice.
  constexpr int kSamples = 20;
  const PointLocator locator(p);
  double best = 0.0;
  const Vec3 step = box.extent() / kSamples;
  for (int i = 0; i < kSamples; ++i) {
    for (int j = 0; j < kSamples; ++j) {
      for (int k = 0; k < kSamples; ++k) {
        const Point3 q =
            box.lo + Vec3((i + 0.5) * step.x(), (j + 0.5) * step.y(),
                          (k + 0.5) * step.z());
        if (!locator.contains(q)) continue;
        best = std::max(best, locator.distance_to_boundary(q));
      }
    }
  }
  return best;
}

}  // namespace polyrefine
