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

#include "polyrefine/voxel.hpp"

#include <algorithm>

#include "polyrefine/error.hpp"
#include "polyrefine/labels.hpp"

namespace polyrefine {

const char* to_string(ShapeLabel label) {
  switch (label) {
    case ShapeLabel::kTetrahedron: return "tetrahedron";
    case ShapeLabel::kPrism: return "prism";
    case ShapeLabel::kCube: return "cube";
    case ShapeLabel::kOther: return "other";
  }
  return "unknown";
}

ShapeLabel parse_label(const std::string& name) {
  for (ShapeLabel l : kAllLabels) {
    if (name == to_string(l)) return l;
  }
  throw Error(ErrorCode::kUsage, "unknown shape label '" + name + "'");
}

int BinaryImage::occupied() const {
  return static_cast<int>(std::count(voxels.begin(), voxels.end(), 1));
}

BinaryImage voxelize(const Polyhedron& p) {
  const BoundingBox box = bounding_box(p);
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0) || !std::isfinite(longest)) {
    throw Error(ErrorCode::kDegenerateElement, "cannot voxelize a flat element");
  }
  const double scale = (kImageSide - 2) / longest;
  const Point3 center = box.center();
  Polyhedron image_space = p;
  for (auto& v : image_space.vertices) {
    v = (v - center) * scale + Point3::Constant(0.5 * kImageSide);
  }
  const PointLocator locator(image_space, 1e-9);
  BinaryImage img;
  img.source_id = p.id;
  for (int k = 0; k < kImageSide; ++k) {
    for (int j = 0; j < kImageSide; ++j) {
      for (int i = 0; i < kImageSide; ++i) {
        img.voxels[BinaryImage::index(i, j, k)] =
            locator.contains(Point3(i + 0.5, j + 0.5, k + 0.5)) ? 1 : 0;
      }
    }
  }
  if (img.occupied() == 0) {
    throw Error(ErrorCode::kDegenerateElement, "element occupies no voxel");
  }
  return img;
}

}  // namespace polyrefine
