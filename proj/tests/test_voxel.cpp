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
#include "doctest.h"
#include "polyrefine/error.hpp"
#include "polyrefine/voxel.hpp"

using namespace polyrefine;

TEST_CASE("boxes fill an exact voxel block") {
  const auto cube = voxelize(make_box({0, 0, 0}, {1, 1, 1}));
  CHECK(cube.occupied() == 14 * 14 * 14);
  CHECK(cube.at(1, 1, 1) == 1);
  CHECK(cube.at(14, 14, 14) == 1);
  CHECK(cube.at(0, 5, 5) == 0);
  CHECK(cube.at(15, 5, 5) == 0);

  // y spans [4.85, 11.15] and z spans [5.9, 10.1] in voxel units.
  const auto slab = voxelize(make_box({0, 0, 0}, {2, 0.9, 0.6}));
  CHECK(slab.occupied() == 14 * 6 * 4);
  CHECK(slab.at(1, 5, 6) == 1);
  CHECK(slab.at(1, 4, 6) == 0);
  CHECK(slab.at(1, 10, 9) == 1);
  CHECK(slab.at(1, 11, 9) == 0);
  CHECK(slab.at(1, 10, 10) == 0);
}

TEST_CASE("voxelization ignores position and scale") {
  const auto tet = make_tetrahedron({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1});
  const auto moved = transformed(tet, 3.7 * Eigen::Matrix3d::Identity(), Vec3(5, -2, 9));
  CHECK(voxelize(tet) == voxelize(moved));
  const auto img = voxelize(tet);
  // Voxel center i + 0.5 maps back to x = (i - 0.5) / 14.
  int expected = 0;
  for (int i = 1; i < 16; ++i) {
    for (int j = 1; j < 16; ++j) {
      for (int k = 1; k < 16; ++k) expected += i + j + k - 1.5 < 14.0;
    }
  }
  CHECK(img.occupied() == expected);
  CHECK(img.at(1, 1, 1) == 1);
  CHECK(img.at(14, 14, 14) == 0);
}

TEST_CASE("flat input is rejected") {
  CHECK_THROWS_AS(voxelize(make_box({0, 0, 0}, {1, 1, 1e-15})), Error);
}
