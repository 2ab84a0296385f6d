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
#include "polyrefine/error.hpp"
#include "polyrefine/grid_gen.hpp"
#include "polyrefine/mesh.hpp"

using namespace polyrefine;

TEST_CASE("replace_element keeps provenance and volume") {
  Mesh m;
  const ElementId a = m.add(make_box({0, 0, 0}, {1, 1, 1}));
  const ElementId b = m.add(make_box({1, 0, 0}, {2, 1, 1}));
  CHECK(total_volume(m) == doctest::Approx(2.0));
  const auto halves =
      clip_by_plane(m.elements.at(a), CuttingPlane::make({0.5, 0, 0}, {1, 0, 0}))
          .children();
  const auto ids = replace_element(m, a, halves);
  REQUIRE(ids.size() == 2);
  CHECK(m.size() == 3);
  CHECK_FALSE(m.elements.count(a));
  for (ElementId id : ids) {
    CHECK(m.parent.at(id) == a);
    CHECK(m.elements.at(id).id == id);
    CHECK(id > b);
  }
  CHECK(total_volume(m) == doctest::Approx(2.0));
  CHECK(mesh_size(m) == doctest::Approx(std::sqrt(3.0)));

  std::vector<Polyhedron> wrong{make_box({1, 0, 0}, {1.5, 1, 1})};
  CHECK_THROWS_AS(replace_element(m, b, wrong), Error);
  CHECK(m.elements.count(b));
  CHECK_THROWS_AS(replace_element(m, 999, {}), Error);
}

TEST_CASE("vertex welder merges nearby points") {
  VertexWelder w(1e-9);
  const int a = w.insert({0.1, 0.2, 0.3});
  CHECK(w.insert({0.1 + 4e-10, 0.2, 0.3 - 4e-10}) == a);
  CHECK(w.insert({0.1 + 1e-6, 0.2, 0.3}) != a);
  CHECK(w.points().size() == 2);
}

TEST_CASE("complexity of structured grids") {
  for (int n : {1, 2, 3}) {
    GridSpec spec;
    spec.kind = GridKind::kCubes;
    spec.resolution = n;
    const auto s = complexity_stats(structured_grid(spec));
    const std::size_t m = n + 1;
    CHECK(s.n_elements == std::size_t(n * n * n));
    CHECK(s.n_vertices == m * m * m);
    CHECK(s.n_edges == 3 * n * m * m);
    CHECK(s.n_faces == 3 * n * n * m);
  }
  GridSpec spec;
  spec.resolution = 1;
  spec.kind = GridKind::kTetrahedra;
  auto s = complexity_stats(structured_grid(spec));
  CHECK(s.n_elements == 6);
  CHECK(s.n_vertices == 8);
  CHECK(s.n_edges == 19);
  CHECK(s.n_faces == 18);
  spec.kind = GridKind::kPrisms;
  s = complexity_stats(structured_grid(spec));
  CHECK(s.n_elements == 2);
  CHECK(s.n_edges == 14);
  CHECK(s.n_faces == 9);

  RefineTimings t;
  t.record("diameter", 0.5);
  t.record("diameter", 1.5);
  s = complexity_stats(structured_grid(spec), t);
  CHECK(s.total_refine_time == doctest::Approx(2.0));
  CHECK(s.mean_time_per_element == doctest::Approx(1.0));
}
