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

#include "doctest.h"
#include "polyrefine/dataset.hpp"
#include "polyrefine/error.hpp"
#include "polyrefine/grid_gen.hpp"
#include "polyrefine/refine.hpp"
#include "support.hpp"

using namespace polyrefine;

namespace {

const Polyhedron kCube = make_box({0, 0, 0}, {1, 1, 1});

double sum_volume(const std::vector<Polyhedron>& pieces) {
  double v = 0.0;
  for (const auto& p : pieces) v += volume(p);
  return v;
}

std::vector<double> sorted_volumes(const std::vector<Polyhedron>& pieces) {
  std::vector<double> v;
  for (const auto& p : pieces) v.push_back(volume(p));
  std::sort(v.begin(), v.end());
  return v;
}

class FixedClassifier : public ShapeClassifier {
 public:
  explicit FixedClassifier(ShapeLabel label) : label_(label) {}
  ShapeLabel classify(const Polyhedron&) const override { return label_; }

 private:
  ShapeLabel label_;
};

}  // namespace

TEST_CASE("strategy names round-trip") {
  for (Strategy s : {Strategy::kDiameter, Strategy::kKMeans, Strategy::kCnn,
                     Strategy::kClassicalTet, Strategy::kClassicalPrism,
                     Strategy::kClassicalCube}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_strategy("bisect"), Error);
}

TEST_CASE("snapping") {
  const double tol = 1e-3;
  SUBCASE("far plane is unchanged") {
    const auto plane = CuttingPlane::make({0.5, 0.3, 0.3}, {1, 0, 0});
    const auto s = snap_plane(plane, kCube, tol);
    CHECK(s.near_vertices == 0);
    CHECK(s.plane.origin.isApprox(plane.origin));
  }
  SUBCASE("one near vertex moves the plane onto it") {
    const auto plane = CuttingPlane::make({0.5, 0.5, 0.5}, Vec3(1, 1, 1));
    const auto shifted = CuttingPlane::make({0.3333, 0.3333, 0.3333}, Vec3(1, 1, 1));
    const auto s = snap_plane(shifted, make_tetrahedron({0, 0, 0}, {1, 0, 0}, {0, 1, 0},
                                                        {0, 0, 1}),
                              tol);
    CHECK(s.near_vertices == 3);
    CHECK(std::abs(s.plane.signed_distance({1, 0, 0})) < 1e-12);
    CHECK(s.plane.normal.dot(plane.normal) > 0.99);
    const Vec3 n = Vec3(1, 0.2, 0.1).normalized();
    const auto corner = CuttingPlane::make(Point3(1, 0, 0) - 5e-4 * n, n);
    const auto c = snap_plane(corner, make_tetrahedron({0, 0, 0}, {1, 0, 0},
                                                       {0, 1, 0}, {0, 0, 1}),
                              tol);
    CHECK(c.near_vertices == 1);
    CHECK(std::abs(c.plane.signed_distance({1, 0, 0})) < 1e-12);
    CHECK(c.plane.normal.isApprox(corner.normal));
  }
  SUBCASE("two near vertices keep the plane through their edge") {
    const auto plane = CuttingPlane::make({0.5, 0.5, 0.5}, Vec3(1, -1, 0.0004));
    const auto s = snap_plane(plane, kCube, tol);
    CHECK(s.near_vertices == 4);
    CHECK(s.least_squares);
    for (const auto& v : kCube.vertices) {
      if (std::abs(v.x() - v.y()) < 1e-12) {
        CHECK(std::abs(s.plane.signed_distance(v)) < 1e-12);
      }
    }
    const auto two = CuttingPlane::make({0.0002, 0, 0.5}, Vec3(1, 0.3, 0));
    const auto t = snap_plane(two, kCube, tol);
    CHECK(t.near_vertices == 2);
    CHECK(std::abs(t.plane.signed_distance({0, 0, 0})) < 1e-12);
    CHECK(std::abs(t.plane.signed_distance({0, 0, 1})) < 1e-12);
    CHECK(t.plane.normal.dot(two.normal) > 0.0);
  }
}

TEST_CASE("validity rejects slivers but accepts inherited short edges") {
  const double tol = 1e-3;
  const auto sliver = clip_by_plane(kCube, CuttingPlane::make({1e-5, 0, 0}, {1, 0, 0}));
  CHECK_FALSE(validity_check(kCube, sliver, tol));
  CHECK_FALSE(validity_check(sliver.children(), tol));
  const auto half = clip_by_plane(kCube, CuttingPlane::make({0.5, 0, 0}, {1, 0, 0}));
  CHECK(validity_check(kCube, half, tol));

  // A corner bevel smaller than tol survives because the cut leaves it intact.
  const Polyhedron bevelled =
      *clip_convex(kCube, CuttingPlane::make({1, 1, 1 - 5e-4}, Vec3(1, 1, 1)));
  const auto cut = clip_by_plane(bevelled, CuttingPlane::make({0.5, 0, 0}, {1, 0, 0}));
  CHECK(validity_check(bevelled, cut, tol));
  CHECK_FALSE(validity_check(cut.children(), tol));

  const Polyhedron thin = make_box({0, 0, 0}, {1, 1, 5e-4});
  CHECK_FALSE(validity_check(
      thin, clip_by_plane(thin, CuttingPlane::make({0.5, 0, 0}, {1, 0, 0})), tol));

  const auto dented = clip_by_plane(testing::dented_cube(), CuttingPlane::make(
                                                                {0, 0, 0.6}, {0, 0, 1}));
  CHECK_FALSE(validity_check(testing::dented_cube(), dented, tol));
}

TEST_CASE("emergency strategy recovers from a plane snapped onto a face") {
  RefineConfig cfg;
  Rng rng(11);
  const double tol = 1e-3 * diameter(kCube);
  const auto plane = CuttingPlane::make({1e-4, 0.5, 0.5}, {1, 0, 0});
  const auto snapped = snap_plane(plane, kCube, tol).plane;
  CHECK(std::abs(snapped.signed_distance({0, 0.3, 0.7})) < 1e-12);
  CHECK_THROWS_AS(clip_by_plane(kCube, snapped), Error);
  const auto em = emergency_strategy(kCube, plane, tol, cfg, rng);
  CHECK(em.attempts >= 1);
  CHECK(em.attempts <= 50);
  CHECK(sum_volume(em.cut.children()) == doctest::Approx(1.0));

  cfg.emergency_attempts = 3;
  cfg.emergency_shift = 1e-6;
  cfg.emergency_angle_deg = 0.0;
  CHECK_THROWS_AS(emergency_strategy(kCube, snapped, tol, cfg, rng), Error);
}

TEST_CASE("diameter plane bisects the longest vertex pair") {
  const Polyhedron box = make_box({0, 0, 0}, {4, 1, 1});
  const auto plane = diameter_plane(box);
  CHECK(std::abs(plane.signed_distance({2, 0.5, 0.5})) < 1e-12);
  const auto children = clip_by_plane(box, plane).children();
  REQUIRE(children.size() == 2);
  CHECK(volume(children[0]) == doctest::Approx(2.0));
}

TEST_CASE("classical patterns on the reference solids") {
  RefineConfig cfg;
  Rng rng(1);
  SUBCASE("cube gives eight congruent cubes") {
    const auto r = refine_with_pattern(
        kCube, classical_planes(reference_shape(kCube, ShapeLabel::kCube)), cfg, rng);
    REQUIRE(r.children.size() == 8);
    for (const auto& c : r.children) {
      CHECK(volume(c) == doctest::Approx(0.125));
      CHECK(diameter(c) == doctest::Approx(std::sqrt(3.0) / 2));
      CHECK(c.faces.size() == 6);
    }
  }
  SUBCASE("prism gives eight equal prisms") {
    const Polyhedron prism = base_shape(ShapeLabel::kPrism);
    const double v = volume(prism);
    const auto r = refine_with_pattern(
        prism, classical_planes(reference_shape(prism, ShapeLabel::kPrism)), cfg, rng);
    REQUIRE(r.children.size() == 8);
    for (const auto& c : r.children) {
      CHECK(volume(c) == doctest::Approx(v / 8));
      CHECK(c.faces.size() == 5);
    }
  }
  SUBCASE("tetrahedron gives four corner tets and two pyramids") {
    const Polyhedron tet = make_regular_tetrahedron();
    const double v = volume(tet);
    const auto r = refine_with_pattern(
        tet, classical_planes(reference_shape(tet, ShapeLabel::kTetrahedron)), cfg, rng);
    REQUIRE(r.children.size() == 6);
    const auto vols = sorted_volumes(r.children);
    for (int i = 0; i < 4; ++i) CHECK(vols[i] == doctest::Approx(v / 8));
    for (int i = 4; i < 6; ++i) CHECK(vols[i] == doctest::Approx(v / 4));
  }
}

TEST_CASE("reference shapes survive perturbation") {
  PerturbationConfig perturb;
  for (ShapeLabel label :
       {ShapeLabel::kTetrahedron, ShapeLabel::kPrism, ShapeLabel::kCube}) {
    int built = 0;
    for (int i = 0; i < 50; ++i) {
      Rng rng(mix_seed(77, i));
      const Polyhedron p = perturbed_shape(label, rng, perturb);
      try {
        const auto ref = reference_shape(p, label);
        CHECK(classical_planes(ref).size() >= 3);
        ++built;
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kDegenerateReference);
      }
    }
    CHECK(built >= 45);
  }
  CHECK_THROWS_AS(reference_shape(make_regular_tetrahedron(), ShapeLabel::kCube), Error);
}

TEST_CASE("budget and target size bound the number of children") {
  RefineConfig cfg;
  for (Strategy s : {Strategy::kDiameter, Strategy::kKMeans, Strategy::kClassicalCube}) {
    cfg.strategy = s;
    for (int nmax : {2, 3, 5, 8}) {
      cfg.nmax = nmax;
      const auto r = refine_element(kCube, cfg);
      CHECK(r.children.size() >= 2);
      CHECK(static_cast<int>(r.children.size()) <= nmax);
      CHECK(sum_volume(r.children) == doctest::Approx(1.0));
      CHECK(validity_check(r.children, 1e-3 * std::sqrt(3.0)));
    }
  }
  cfg.strategy = Strategy::kDiameter;
  cfg.nmax = 1024;
  cfg.target_factor = 0.25;
  const auto r = refine_element(kCube, cfg);
  CHECK(r.children.size() < 1024);
  for (const auto& c : r.children) CHECK(diameter(c) <= 0.25 * std::sqrt(3.0) + 1e-9);
}

TEST_CASE("an element without a valid cut is reported unrefinable") {
  RefineConfig cfg;
  cfg.emergency_attempts = 0;
  Rng rng(5);
  const auto r = refine_with_source(
      kCube, [](const Polyhedron&, Rng&) { return CuttingPlane::make({0, 0, 0}, {1, 0, 0}); },
      cfg, rng);
  CHECK(r.unrefinable);
  CHECK(r.cuts == 0);
  REQUIRE(r.children.size() == 1);
  CHECK(volume(r.children[0]) == doctest::Approx(1.0));
}

TEST_CASE("cnn dispatch follows the label") {
  RefineConfig cfg;
  cfg.strategy = Strategy::kCnn;
  CHECK_THROWS_AS(refine_element(kCube, cfg), Error);
  const FixedClassifier cube(ShapeLabel::kCube);
  auto r = refine_element(kCube, cfg, &cube);
  CHECK(r.applied == Strategy::kClassicalCube);
  CHECK(r.children.size() == 8);
  REQUIRE(r.label.has_value());
  CHECK(*r.label == ShapeLabel::kCube);
  const FixedClassifier other(ShapeLabel::kOther);
  r = refine_element(kCube, cfg, &other);
  CHECK(r.applied == Strategy::kKMeans);
  const FixedClassifier tet(ShapeLabel::kTetrahedron);
  r = refine_element(make_box({0, 0, 0}, {1, 1, 1}), cfg, &tet);
  CHECK(sum_volume(r.children) == doctest::Approx(1.0));
}

TEST_CASE("tetrahedron pattern planes are anchored inside the element") {
  const Polyhedron tet = transformed(make_regular_tetrahedron(),
                                     Eigen::Vector3d(1.0, 0.7, 1.3).asDiagonal(),
                                     Vec3(0.2, -0.1, 0.4));
  const auto planes = classical_planes(reference_shape(tet, ShapeLabel::kTetrahedron));
  REQUIRE(planes.size() == 5);
  for (const auto& pp : planes) {
    REQUIRE(pp.anchor.has_value());
    CHECK(contains_point(tet, *pp.anchor));
  }
  const auto cube = classical_planes(
      reference_shape(make_box({0, 0, 0}, {1, 1, 1}), ShapeLabel::kCube));
  for (const auto& pp : cube) CHECK_FALSE(pp.anchor.has_value());
}

TEST_CASE("poorly fitting reference shapes fall back to k-means") {
  RefineConfig cfg;
  Rng rng(71);
  int classical = 0, fallback = 0;
  for (int i = 0; i < 60; ++i) {
    Polyhedron p = testing::random_convex(rng, 8 + static_cast<int>(rng.below(16)));
    p.id = i;
    for (ShapeLabel label :
         {ShapeLabel::kTetrahedron, ShapeLabel::kPrism, ShapeLabel::kCube}) {
      const FixedClassifier fixed(label);
      cfg.strategy = Strategy::kCnn;
      const auto r = refine_element(p, cfg, &fixed);
      double largest = 0.0;
      for (const auto& c : r.children) largest = std::max(largest, diameter(c));
      if (r.applied == Strategy::kKMeans) {
        ++fallback;
        continue;
      }
      ++classical;
      const double shrink = label == ShapeLabel::kTetrahedron ? std::sqrt(0.5) : 0.5;
      CHECK(largest <= 1.1 * shrink * diameter(p) + 1e-12);
    }
  }
  CHECK(classical > 0);
  CHECK(fallback > 0);
}

TEST_CASE("refinement is deterministic per element") {
  RefineConfig cfg;
  cfg.strategy = Strategy::kKMeans;
  cfg.rng_seed = 3;
  Rng rng(9);
  Polyhedron p = testing::random_convex(rng, 20);
  p.id = 17;
  const auto a = refine_element(p, cfg);
  const auto b = refine_element(p, cfg);
  REQUIRE(a.children.size() == b.children.size());
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    CHECK(a.children[i].vertices == b.children[i].vertices);
  }
}

TEST_CASE("error indicator") {
  SUBCASE("linear field on the unit cube") {
    const double a = 0.7, b = -1.3, c = 2.0;
    const ScalarField u = [&](const Point3& x) {
      return a * x.x() + b * x.y() + c * x.z() + 4.0;
    };
    // Each coordinate takes the values 0.1, 0.3, ..., 0.9 with variance 0.08.
    const double expected = std::sqrt(0.08 * (a * a + b * b + c * c));
    CHECK(error_indicator(kCube, u) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("constant field") {
    CHECK(error_indicator(kCube, field_by_name("constant")) == doctest::Approx(0.0));
  }
  SUBCASE("scales with the square root of the volume") {
    const Polyhedron big = make_box({0, 0, 0}, {2, 2, 2});
    const ScalarField u = [](const Point3& x) { return x.x(); };
    CHECK(error_indicator(big, u) ==
          doctest::Approx(std::sqrt(8.0) * 2.0 * error_indicator(kCube, u)));
  }
  CHECK(boundary_layer_field({0, 0.5, 0.5}) == doctest::Approx(0.0));
  CHECK(boundary_layer_field({1, 0.5, 0.5}) == doctest::Approx(0.0));
  CHECK(boundary_layer_field({0.5, 0.5, 0.5}) ==
        doctest::Approx(-(1 - std::exp(-5.0)) * 0.5));
  CHECK_THROWS_AS(field_by_name("nope"), Error);
}

TEST_CASE("marked count") {
  CHECK(marked_count(0.4, 64) == 26);
  CHECK(marked_count(0.5, 64) == 32);
  CHECK(marked_count(0.25, 64) == 16);
  CHECK(marked_count(1.0, 7) == 7);
  CHECK(marked_count(0.01, 7) == 1);
  CHECK_THROWS_AS(marked_count(0.0, 10), Error);
  CHECK_THROWS_AS(marked_count(1.5, 10), Error);
}

TEST_CASE("uniform driver") {
  GridSpec spec;
  spec.kind = GridKind::kCubes;
  spec.resolution = 2;
  RefineConfig cfg;
  cfg.strategy = Strategy::kClassicalCube;
  const auto d = uniform_refine(structured_grid(spec), cfg, 2);
  CHECK(d.mesh.size() == 512);
  CHECK(total_volume(d.mesh) == doctest::Approx(1.0));
  CHECK(d.unrefinable == 0);
  CHECK(d.attempted == 8 + 64);
  REQUIRE(d.steps.size() == 2);
  CHECK(d.steps[0].elements_after == 64);
  CHECK(d.steps[1].mesh_size == doctest::Approx(std::sqrt(3.0) / 8));
  CHECK(d.log.size() == 72);
}

TEST_CASE("adaptive driver refines the largest indicators") {
  GridSpec spec;
  spec.kind = GridKind::kCubes;
  spec.resolution = 4;
  const Mesh grid = structured_grid(spec);
  RefineConfig cfg;
  cfg.strategy = Strategy::kDiameter;
  cfg.nmax = 2;
  const ScalarField u = [](const Point3& x) { return x.x() * x.x(); };
  const auto d = adaptive_refine(grid, cfg, u, 0.25, 1);
  REQUIRE(d.steps.size() == 1);
  CHECK(d.steps[0].marked == 16);
  CHECK(d.mesh.size() == 64 + 16);
  // The variance of x^2 grows with x, so the last column is refined.
  for (const auto& entry : d.log) {
    const auto& cell = grid.elements.at(entry.id);
    CHECK(bounding_box(cell).lo.x() == doctest::Approx(0.75));
  }
}
