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
#include <cmath>

#include "doctest.h"
#include "polyrefine/clustering.hpp"
#include "polyrefine/error.hpp"
#include "support.hpp"

using namespace polyrefine;

TEST_CASE("interior lattice") {
  const auto pts = interior_grid_points(make_box({0, 0, 0}, {1, 1, 1}), 1000);
  CHECK(pts.size() == 1000);
  const auto tet = make_tetrahedron({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1});
  const auto inside = interior_grid_points(tet, 8000);
  // Cell centers (i + 0.5) / 20 with i + j + k + 1.5 < 20.
  std::size_t expected = 0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      for (int k = 0; k < 20; ++k) expected += (i + j + k + 1.5) < 20.0;
    }
  }
  CHECK(inside.size() == expected);
  CHECK_THROWS_AS(interior_grid_points(tet, 8), Error);
}

TEST_CASE("two means splits separated blobs") {
  std::vector<Point3> pts;
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Point3 jitter(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                        rng.uniform(-0.1, 0.1));
    pts.push_back((i % 2 ? Point3(1, 0, 0) : Point3(-1, 0, 0)) + jitter);
  }
  const auto r = two_means(pts, pts[0], pts[2], 50);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(r.assignment[i] == r.assignment[i % 2]);
  }
  CHECK(r.assignment[0] != r.assignment[1]);
  CHECK(r.n1 == 100);
  CHECK(r.n2 == 100);
  for (std::size_t i = 1; i < r.objective.size(); ++i) {
    CHECK(r.objective[i] <= r.objective[i - 1] + 1e-12);
  }
  const auto far = two_means(pts, Point3(0, 0, 0), Point3(50, 50, 50), 50);
  CHECK(far.reseeds >= 1);
  CHECK(far.n1 > 0);
  CHECK(far.n2 > 0);
}

TEST_CASE("k-means plane bisects an elongated box") {
  const Polyhedron box = make_box({0, 0, 0}, {2, 1, 1});
  for (bool deterministic : {false, true}) {
    KMeansConfig cfg;
    cfg.deterministic_init = deterministic;
    cfg.rng_seed = 5;
    cfg.n_grid_points = deterministic ? 1000 : 8000;
    const auto r = kmeans_cutting_plane(box, cfg);
    CHECK(std::abs(r.plane.normal.x()) == doctest::Approx(1.0));
    CHECK(std::abs(r.plane.signed_distance({1, 0.5, 0.5})) < 1e-9);
    CHECK(r.n1 == r.n2);
  }
  Rng rng(3);
  const auto p = testing::random_convex(rng);
  KMeansConfig cfg;
  const auto r = kmeans_cutting_plane(p, cfg);
  CHECK(r.plane.normal.norm() == doctest::Approx(1.0));
  CHECK(r.plane.signed_distance(r.c1) * r.plane.signed_distance(r.c2) < 0.0);
}
