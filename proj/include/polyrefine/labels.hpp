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
#include <string>

namespace polyrefine {

enum class ShapeLabel : std::uint8_t {
  kTetrahedron = 0,
  kPrism = 1,
  kCube = 2,
  kOther = 3,
};

inline constexpr int kNumLabels = 4;
inline constexpr std::array<ShapeLabel, kNumLabels> kAllLabels = {
    ShapeLabel::kTetrahedron, ShapeLabel::kPrism, ShapeLabel::kCube,
    ShapeLabel::kOther};

const char* to_string(ShapeLabel label);
ShapeLabel parse_label(const std::string& name);

}  // namespace polyrefine
