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

#include <cstdint>
#include <string>
#include <vector>

#include "polyrefine/geometry.hpp"
#include "polyrefine/mesh.hpp"

namespace polyrefine {

enum class GridKind { kTetrahedra, kCubes, kPrisms, kVoronoi, kCvt };

const char* to_string(GridKind kind);
GridKind parse_grid_kind(const std::string& name);

struct GridSpec {
  GridKind kind = GridKind::kCubes;
  int resolution = 4;  // elements per axis, or seed count for voronoi/cvt
  std::uint64_t rng_seed = 0;
  int cvt_iterations = 50;
  double cvt_tolerance = 1e-4;
  int threads = 1;
};

Mesh structured_grid(const GridSpec& spec);
Mesh voronoi_grid(const GridSpec& spec);
Mesh cvt_grid(const GridSpec& spec);
Mesh generate_grid(const GridSpec& spec);

std::vector<Point3> random_seeds(int count, std::uint64_t rng_seed);

// Cell of seed i clipped to the unit box.
Polyhedron voronoi_cell(const std::vector<Point3>& seeds, std::size_t i);

// Voronoi cells of `seeds` clipped to the unit box, element i for seed i.
Mesh voronoi_from_seeds(const std::vector<Point3>& seeds, int threads = 1);

struct CvtResult {
  Mesh mesh;
  std::vector<Point3> seeds;
  int iterations = 0;
  double last_displacement = 0.0;
};

CvtResult lloyd(std::vector<Point3> seeds, int max_iterations, double tolerance,
                int threads = 1);

}  // namespace polyrefine
