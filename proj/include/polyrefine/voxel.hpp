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

#include <array>
#include <cstdint>

#include "polyrefine/geometry.hpp"

namespace polyrefine {

inline constexpr int kImageSide = 16;
inline constexpr int kImageVoxels = kImageSide * kImageSide * kImageSide;

struct BinaryImage {
  // Index (k * 16 + j) * 16 + i for voxel (x = i, y = j, z = k).
  std::array<std::uint8_t, kImageVoxels> voxels{};
  ElementId source_id = kNoElement;

  static constexpr int index(int i, int j, int k) {
    return (k * kImageSide + j) * kImageSide + i;
  }
  std::uint8_t at(int i, int j, int k) const { return voxels[index(i, j, k)]; }
  int occupied() const;

  bool operator==(const BinaryImage& other) const {
    return voxels == other.voxels;
  }
};

// Voxel (i, j, k) is set iff its center lies inside p after p's bounding box
// is centered in the image and its longest side scaled to 14 voxels.
BinaryImage voxelize(const Polyhedron& p);

}  // namespace polyrefine
