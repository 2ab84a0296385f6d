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

#include <cmath>
#include <vector>

#include "polyrefine/geometry.hpp"
#include "polyrefine/random.hpp"

namespace polyrefine::testing {

// Right prism over a counter-clockwise polygon in the xy-plane.
inline Polyhedron extrude(const std::vector<Eigen::Vector2d>& poly, double z0,
                          double z1) {
  Polyhedron p;
  const int n = static_cast<int>(poly.size());
  for (const auto& q : poly) p.vertices.emplace_back(q.x(), q.y(), z0);
  for (const auto& q : poly) p.vertices.emplace_back(q.x(), q.y(), z1);
  PolyFace bottom, top;
  for (int i = n - 1; i >= 0; --i) bottom.loop.push_back(i);
  for (int i = 0; i < n; ++i) top.loop.push_back(n + i);
  p.faces.push_back(bottom);
  p.faces.push_back(top);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    p.faces.push_back({{i, j, n + j, n + i}});
  }
  return p;
}

// Unit cube with the column [0.5,1]x[0.5,1]x[0,1] removed.
inline Polyhedron l_shape() {
  return extrude({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}, 0.0,
                 1.0);
}

// Unit cube with an inverted square pyramid carved from its top face.
inline Polyhedron dented_cube(double apex_z = 0.3) {
  Polyhedron p;
  const double a = 0.25, b = 0.75;
  p.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},   // 0-3 bottom
                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},   // 4-7 top
                {a, a, 1}, {b, a, 1}, {b, b, 1}, {a, b, 1},   // 8-11 rim
                {0.5, 0.5, apex_z}};                          // 12 apex
  p.faces = {{{0, 3, 2, 1}},
             {{0, 1, 5, 4}},
             {{1, 2, 6, 5}},
             {{2, 3, 7, 6}},
             {{3, 0, 4, 7}},
             {{4, 5, 9, 8}},
             {{5, 6, 10, 9}},
             {{6, 7, 11, 10}},
             {{7, 4, 8, 11}},
             {{8, 9, 12}},
             {{9, 10, 12}},
             {{10, 11, 12}},
             {{11, 8, 12}}};
  return p;
}

inline Vec3 random_unit(Rng& rng) {
  while (true) {
    const Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

// Convex hull of a random point cloud in a randomly stretched box.
inline Polyhedron random_convex(Rng& rng, int points = 12) {
  const Vec3 scale(rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5),
                   rng.uniform(0.3, 1.5));
  std::vector<Point3> cloud;
  for (int i = 0; i < points; ++i) {
    cloud.emplace_back(scale.x() * rng.uniform(), scale.y() * rng.uniform(),
                       scale.z() * rng.uniform());
  }
  return convex_hull(cloud);
}

// Point strictly inside p as a random convex combination of its vertices.
inline Point3 random_interior(const Polyhedron& p, Rng& rng) {
  Point3 q = Point3::Zero();
  double total = 0.0;
  for (const auto& v : p.vertices) {
    const double w = rng.uniform(0.1, 1.0);
    q += w * v;
    total += w;
  }
  return q / total;
}

}  // namespace polyrefine::testing
